"""sdforge: SQL corpus forging and objective verification.

Thin Python surface over the C++ core; structured results cross the
boundary as JSON strings (see :func:`label_pair`).
"""

from sdforge._core import (
    DEFAULT_TAU,
    DEPENDENCY_TYPES,
    canonical_sql,
    competence,
    derive_seed,
    joint_loss,
    joint_loss_with_grads,
    label_pair,
    ngram_match,
    normalize_phrase,
    question_for,
    sample_sql,
    splitmix64,
    tokenize,
)

__all__ = [
    "DEFAULT_TAU",
    "DEPENDENCY_TYPES",
    "canonical_sql",
    "competence",
    "derive_seed",
    "joint_loss",
    "joint_loss_with_grads",
    "label_pair",
    "ngram_match",
    "normalize_phrase",
    "question_for",
    "sample_sql",
    "splitmix64",
    "tokenize",
]
