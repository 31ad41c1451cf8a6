"""Deterministic synthetic contract corpus with controlled structure.

The generator plants two kinds of structure that the pipeline is expected to
recover:

* **Type co-occurrence.** Contracts come in two families. Family A contracts
  always contain the target type ("governing laws") plus a high-probability
  pool of five companion types; family B contracts never contain the target
  and draw from a disjoint pool. One shared type ("insurance") appears in
  both. Collaborative filtering and document similarity should therefore
  separate the families cleanly.
* **Templated clause text.** Every clause type has one dominant template
  (75% of clauses) and two minority templates (12.5% each) with little
  lexical overlap between templates. References for content recommendation
  are usually dominant-template clauses, so a retrieval query that leans on
  the clause-type representation should beat one that uses the contract
  representation alone.

Each clause also carries a family marker phrase and a few noise tokens so
that contracts are textually family-separable and no two clauses are
identical.
"""

from __future__ import annotations

import random

from .corpus import Clause, Contract

DEFAULT_SEED = 29
DEFAULT_CONTRACTS_PER_FAMILY = 100

TARGET_TYPE = "governing laws"
SHARED_TYPE = "insurance"
# The pools are deliberately unequal (6 vs 4). The collaborative-filtering
# score normalizes by the *signed* sum of the target's similarities to all
# other types; with equal pools the positive (family A) and negative
# (family B) similarities cancel, the normalizer approaches zero, and scores
# blow up with arbitrary sign. The 6/4 split keeps the sum safely positive.
FAMILY_A_TYPES = (
    "severability",
    "notices",
    "counterparts",
    "entire agreements",
    "confidentiality",
    "amendments",
)
FAMILY_B_TYPES = ("termination", "indemnification", "assignment", "waiver")

POOL_PROBABILITY = 0.8
SHARED_PROBABILITY = 0.5
DOMINANT_WEIGHT = 0.75  # remaining mass split evenly over the two minority templates

# Scores from the as-printed collaborative-filtering equations separate the
# two families by a wide margin on this corpus: with the default seed,
# family A contracts (stripped of the target) score >= ~2.5 for the target
# type while family B contracts score <= ~-0.5. The threshold sits in the
# middle of that measured gap.
CF_SCORE_THRESHOLD = 1.0

_FAMILY_PHRASES = {
    "a": "executed under the aurora consortium charter",
    "b": "executed under the borealis syndicate charter",
}

_NOISE_WORDS = (
    "pursuant",
    "herein",
    "thereof",
    "hereunder",
    "whereas",
    "furthermore",
    "notwithstanding",
    "aforementioned",
    "henceforth",
    "provided",
    "stipulated",
    "covenant",
    "undertaking",
    "obligation",
    "duly",
    "mutually",
    "jointly",
    "severally",
    "respective",
    "applicable",
    "reasonable",
    "customary",
    "foregoing",
    "hereto",
)

# label -> (dominant template, minority template 1, minority template 2)
CLAUSE_TEMPLATES: dict[str, tuple[str, str, str]] = {
    "governing laws": (
        "this agreement shall be governed by and construed in accordance with the laws "
        "of the state of delaware without regard to conflict of law principles",
        "the courts of new york shall have exclusive jurisdiction over any dispute "
        "arising from this agreement",
        "any controversy shall be resolved under the substantive law of the commonwealth "
        "of virginia",
    ),
    "severability": (
        "if any provision of this agreement is held invalid or unenforceable the "
        "remaining provisions shall continue in full force and effect",
        "an unenforceable term shall be reformed only to the extent necessary to make "
        "it enforceable",
        "the invalidity of any clause does not affect the validity of the agreement as "
        "a whole",
    ),
    "notices": (
        "all notices under this agreement shall be in writing and delivered by "
        "certified mail to the addresses set forth below",
        "a notice is deemed received two business days after deposit with an overnight "
        "courier service",
        "electronic mail to the designated account constitutes sufficient notice for "
        "routine communications",
    ),
    "counterparts": (
        "this agreement may be executed in any number of counterparts each of which "
        "shall be deemed an original",
        "signatures transmitted by facsimile or pdf are treated as original signatures "
        "for all purposes",
        "the parties may sign separate copies which together constitute one and the "
        "same instrument",
    ),
    "entire agreements": (
        "this agreement constitutes the entire agreement between the parties and "
        "supersedes all prior understandings and representations",
        "no oral statement made during negotiations shall modify the written terms "
        "contained herein",
        "each party acknowledges that it has not relied on any promise not expressly "
        "stated in this document",
    ),
    "confidentiality": (
        "each party shall keep confidential all proprietary information disclosed by "
        "the other party during the term of this agreement",
        "the receiving party may disclose protected information only when compelled by "
        "a court order",
        "confidential materials must be returned or destroyed within thirty days of "
        "termination of the relationship",
    ),
    "termination": (
        "either party may terminate this agreement upon thirty days written notice to "
        "the other party for material breach",
        "termination for convenience requires payment of all fees accrued through the "
        "effective date",
        "upon expiration of the initial term the agreement renews automatically for "
        "successive one year periods unless cancelled",
    ),
    "indemnification": (
        "each party shall indemnify and hold harmless the other party from all claims "
        "arising out of its negligence or willful misconduct",
        "the indemnifying party controls the defense and settlement of any covered "
        "third party claim",
        "liability under this section is capped at the total fees paid during the "
        "preceding twelve months",
    ),
    "assignment": (
        "neither party may assign this agreement without the prior written consent of "
        "the other party which shall not be unreasonably withheld",
        "a merger or sale of substantially all assets does not require consent for "
        "assignment",
        "any attempted transfer in violation of this section is void and of no effect",
    ),
    "waiver": (
        "no failure or delay in exercising any right under this agreement shall "
        "operate as a waiver of that right",
        "a waiver is effective only if set out in writing and signed by the waiving "
        "party",
        "the single or partial exercise of a remedy does not preclude any other remedy "
        "provided by law",
    ),
    "amendments": (
        "this agreement may be amended only by a written instrument signed by "
        "authorized representatives of both parties",
        "proposed changes must be circulated at least ten business days before they "
        "take effect",
        "course of dealing between the parties shall not be construed to modify any "
        "term of this agreement",
    ),
    "insurance": (
        "each party shall maintain commercial general liability insurance with limits "
        "of not less than one million dollars per occurrence",
        "certificates of coverage must be furnished to the other party upon written "
        "request",
        "policies shall name the counterparty as an additional insured during the term "
        "of the work",
    ),
}

ALL_TYPES = tuple(sorted(CLAUSE_TEMPLATES))


def _clause_text(rng: random.Random, label: str, family_phrase: str) -> str:
    dominant, minor_one, minor_two = CLAUSE_TEMPLATES[label]
    roll = rng.random()
    if roll < DOMINANT_WEIGHT:
        template = dominant
    elif roll < DOMINANT_WEIGHT + (1.0 - DOMINANT_WEIGHT) / 2.0:
        template = minor_one
    else:
        template = minor_two
    noise = rng.sample(_NOISE_WORDS, rng.randint(2, 4))
    return f"{template} {family_phrase} {' '.join(noise)}"


def generate_corpus(
    seed: int = DEFAULT_SEED, contracts_per_family: int = DEFAULT_CONTRACTS_PER_FAMILY
) -> list[Contract]:
    """Generate the two-family corpus (2 * contracts_per_family contracts)."""
    rng = random.Random(seed)
    contracts = []
    plan = (
        ("a", _FAMILY_PHRASES["a"], FAMILY_A_TYPES, True),
        ("b", _FAMILY_PHRASES["b"], FAMILY_B_TYPES, False),
    )
    for family, phrase, pool, has_target in plan:
        for i in range(contracts_per_family):
            labels = [TARGET_TYPE] if has_target else []
            labels.extend(t for t in pool if rng.random() < POOL_PROBABILITY)
            if rng.random() < SHARED_PROBABILITY:
                labels.append(SHARED_TYPE)
            if all(label == TARGET_TYPE for label in labels):
                # Every contract needs at least one non-target clause so it can
                # serve as a usable example once the target is stripped.
                labels.append(rng.choice(pool))
            clauses = [Clause.make(label, _clause_text(rng, label, phrase)) for label in labels]
            rng.shuffle(clauses)
            contracts.append(Contract(f"syn-{family}-{i:03d}", clauses))
    return contracts


def family_of(contract_id: str) -> str:
    """Return "a" or "b" for ids produced by generate_corpus."""
    prefix = "syn-"
    family = contract_id[len(prefix)] if contract_id.startswith(prefix) else ""
    if family not in ("a", "b"):
        raise ValueError(f"unknown synthetic contract id: {contract_id!r}")
    return family
