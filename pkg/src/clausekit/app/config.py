"""Pipeline configuration: one validated object with a stable fingerprint.

The fingerprint is a SHA-256 over the canonical JSON form of the config and
travels with every artifact, report row, and HTTP response so that consumers
can detect artifact swaps. Per-clause-type overrides carry the best-known
neighbor count k (document similarity), score threshold (collaborative
filtering), and classifier learning rate; unlisted types fall back to the
global settings.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..corpus import normalize_label
from ..relevance import SIMILARITY_MODES

ARTIFACT_ROOT_ENV = "CLAUSEKIT_ARTIFACTS"
DEFAULT_ARTIFACT_ROOT = "artifacts"


class ConfigError(ValueError):
    """Raised for invalid or unreadable pipeline configuration."""


# Best-known per-type settings: docsim neighbor count, CF score threshold,
# classifier learning rate.
TYPE_DEFAULTS: dict[str, dict] = {
    "governing laws": {"k": 1, "threshold": 0.27, "lr": 5e-07},
    "counterparts": {"k": 2, "threshold": 0.18, "lr": 1e-06},
    "notices": {"k": 2, "threshold": 0.15, "lr": 5e-06},
    "entire agreements": {"k": 1, "threshold": 0.20, "lr": 1e-05},
    "severability": {"k": 3, "threshold": 0.13, "lr": 1e-06},
}

DEFAULT_CLASSIFIER_LRS = (1e-05, 5e-06, 1e-06, 5e-07)

DEFAULT_ENCODER = {"kind": "builtin-deterministic", "dimension": 256, "seed": 13}

DEFAULT_CLASSIFIER = {"batch_size": 64, "max_epochs": 500, "patience": 50}

# hidden=None resolves to the encoder dimension at training time (the decoder
# hidden size must equal the conditioning vector's dimension).
DEFAULT_GENERATOR = {
    "hidden": None,
    "layers": 3,
    "heads": 4,
    "dropout": 0.1,
    "lr": 1e-05,
    "batch_size": 16,
    "max_epochs": 300,
    "max_steps": None,
    "min_frequency": 2,
    "max_len": 400,
}


@dataclass
class PipelineConfig:
    """Everything a pipeline run depends on, minus artifact locations."""

    corpus_path: str
    corpus_format: str = "jsonl-contracts"
    encoder: dict = field(default_factory=lambda: dict(DEFAULT_ENCODER))
    targets: tuple = tuple(TYPE_DEFAULTS)
    cf_mode: str = "as-printed"
    cf_threshold: float = 0.2
    docsim_k: int = 5
    classifier_lrs: tuple = DEFAULT_CLASSIFIER_LRS
    classifier: dict = field(default_factory=lambda: dict(DEFAULT_CLASSIFIER))
    generator: dict = field(default_factory=lambda: dict(DEFAULT_GENERATOR))
    per_type: dict = field(default_factory=lambda: {k: dict(v) for k, v in TYPE_DEFAULTS.items()})
    seed: int = 13

    def __post_init__(self):
        self.targets = tuple(normalize_label(t) for t in self.targets)
        self.per_type = {normalize_label(k): dict(v) for k, v in self.per_type.items()}
        self.classifier = {**DEFAULT_CLASSIFIER, **self.classifier}
        self.generator = {**DEFAULT_GENERATOR, **self.generator}
        self.validate()

    def validate(self) -> None:
        if not self.corpus_path:
            raise ConfigError("corpus_path must be set")
        if self.cf_mode not in SIMILARITY_MODES:
            raise ConfigError(
                f"cf_mode must be one of {SIMILARITY_MODES}, got {self.cf_mode!r}"
            )
        if not self.targets:
            raise ConfigError("at least one target clause type is required")
        if self.docsim_k < 1:
            raise ConfigError(f"docsim_k must be >= 1, got {self.docsim_k}")
        if not self.classifier_lrs:
            raise ConfigError("classifier_lrs must not be empty")
        if any(lr <= 0 for lr in self.classifier_lrs):
            raise ConfigError("classifier learning rates must be positive")
        for label, overrides in self.per_type.items():
            unknown = set(overrides) - {"k", "threshold", "lr"}
            if unknown:
                raise ConfigError(f"unknown per-type keys for {label!r}: {sorted(unknown)}")
            if "k" in overrides and overrides["k"] < 1:
                raise ConfigError(f"per-type k for {label!r} must be >= 1")

    # ----------------------------------------------------------- per-type
    def docsim_k_for(self, label: str) -> int:
        return int(self.per_type.get(normalize_label(label), {}).get("k", self.docsim_k))

    def cf_threshold_for(self, label: str) -> float:
        return float(
            self.per_type.get(normalize_label(label), {}).get("threshold", self.cf_threshold)
        )

    def classifier_lrs_for(self, label: str) -> tuple:
        lr = self.per_type.get(normalize_label(label), {}).get("lr")
        return (float(lr),) if lr is not None else tuple(self.classifier_lrs)

    # ------------------------------------------------------- serialization
    def to_dict(self) -> dict:
        return {
            "corpus_path": self.corpus_path,
            "corpus_format": self.corpus_format,
            "encoder": dict(self.encoder),
            "targets": list(self.targets),
            "cf_mode": self.cf_mode,
            "cf_threshold": self.cf_threshold,
            "docsim_k": self.docsim_k,
            "classifier_lrs": list(self.classifier_lrs),
            "classifier": dict(self.classifier),
            "generator": dict(self.generator),
            "per_type": {k: dict(v) for k, v in sorted(self.per_type.items())},
            "seed": self.seed,
        }

    @property
    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {
            "corpus_path",
            "corpus_format",
            "encoder",
            "targets",
            "cf_mode",
            "cf_threshold",
            "docsim_k",
            "classifier_lrs",
            "classifier",
            "generator",
            "per_type",
            "seed",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "corpus_path" not in data:
            raise ConfigError("config needs a corpus_path")
        kwargs = dict(data)
        if "targets" in kwargs:
            kwargs["targets"] = tuple(kwargs["targets"])
        if "classifier_lrs" in kwargs:
            kwargs["classifier_lrs"] = tuple(kwargs["classifier_lrs"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path} is not valid JSON: {err.msg}") from err
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must contain a JSON object")
        return cls.from_dict(data)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
