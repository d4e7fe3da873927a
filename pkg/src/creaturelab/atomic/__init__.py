"""Atomic creature systems: finite value-carrying objects with norms and
successor structure, plus exhaustive property checkers and verified
transformations."""

from .base import AtomicParameter, ExplicitAtomicParameter
from .certificates import PropertyCertificate
from .families import (
    HalvingPairFamily,
    ReservoirFamily,
    SubsetLadderFamily,
    TrivialTwoPointFamily,
    capped_ladder,
    plateau_family,
    subset_log_family,
    toy_witness_pair,
)
from .checks import (
    check_bigness,
    check_decisive,
    check_halving,
    check_nice,
    replay_certificate,
    validate_atomic,
)
from .niceness import ScaleBudget, make_nice
from .ops import decisive_order, disjoint_successors, homogenize_product

__all__ = [
    "AtomicParameter",
    "ExplicitAtomicParameter",
    "PropertyCertificate",
    "SubsetLadderFamily",
    "HalvingPairFamily",
    "ReservoirFamily",
    "TrivialTwoPointFamily",
    "subset_log_family",
    "capped_ladder",
    "plateau_family",
    "toy_witness_pair",
    "validate_atomic",
    "check_bigness",
    "check_halving",
    "check_decisive",
    "check_nice",
    "replay_certificate",
    "ScaleBudget",
    "make_nice",
    "decisive_order",
    "disjoint_successors",
    "homogenize_product",
]
