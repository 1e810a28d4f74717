"""Reed-Solomon codes over prime-degree field towers with optimal trace repair."""

from __future__ import annotations

from .errors import RSRPError
from .grs import CodeSpec, Codeword, encode, erasure_decode, interpolate, verify_mds
from .repair import (
    build_main_construction,
    build_simple_construction,
    cutset_bound,
    lemma1_basis,
    lower_bound_subpacketization,
    repair,
    trivial_bandwidth,
)
from .tower import KElement, TowerSpec, make_tower, trace_to_subfield

__version__ = "0.1.0"

__all__ = [
    "RSRPError",
    "CodeSpec",
    "Codeword",
    "encode",
    "erasure_decode",
    "interpolate",
    "verify_mds",
    "build_main_construction",
    "build_simple_construction",
    "cutset_bound",
    "lemma1_basis",
    "lower_bound_subpacketization",
    "repair",
    "trivial_bandwidth",
    "KElement",
    "TowerSpec",
    "make_tower",
    "trace_to_subfield",
]
