"""Versioned on-disk container for trained model parameters."""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .tensor import NNError

FORMAT = "clausekit-model"
VERSION = 1


def _encode_array(arr: np.ndarray) -> dict:
    return {
        "dtype": str(arr.dtype),
        "shape": list(arr.shape),
        "data": base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode("ascii"),
    }


def _decode_array(entry: dict) -> np.ndarray:
    raw = base64.b64decode(entry["data"])
    arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"])).copy()
    return arr.reshape(entry["shape"])


def save_model(
    path: str | Path,
    model_kind: str,
    config: dict,
    params: dict[str, np.ndarray],
    encoder_fingerprint: str,
    extra: dict | None = None,
) -> None:
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "model_kind": model_kind,
        "config": config,
        "encoder_fingerprint": encoder_fingerprint,
        "extra": extra or {},
        "params": {name: _encode_array(arr) for name, arr in sorted(params.items())},
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path, expected_kind: str | None = None) -> dict:
    """Load a model file; returns dict with config, params, encoder_fingerprint, extra."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise NNError(f"cannot read model file {path}: {exc}") from exc
    if payload.get("format") != FORMAT:
        raise NNError(f"{path} is not a {FORMAT} file")
    if payload.get("version") != VERSION:
        raise NNError(f"{path}: unsupported model version {payload.get('version')}")
    if expected_kind is not None and payload.get("model_kind") != expected_kind:
        raise NNError(
            f"{path}: model kind {payload.get('model_kind')!r} does not match expected {expected_kind!r}"
        )
    payload["params"] = {name: _decode_array(entry) for name, entry in payload["params"].items()}
    return payload
