"""Reed-Solomon codes over K: encoding, duality and erasure decoding.

A message (m_0, ..., m_{k-1}) is the coefficient list of f(x) = sum m_t x^t,
and the codeword is (f(w_1), ..., f(w_n)).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CorruptionError,
    InsufficientDataError,
    InvalidInputError,
    ParameterError,
    RefusalError,
)
from .tower import KElement, TowerSpec, element_from_bytes, element_to_bytes, inv

MAIN = "main"
SIMPLE = "simple"
VARIANTS = (MAIN, SIMPLE)

MDS_SUBSET_LIMIT = 10_000


# -- polynomials over K, coefficient lists lowest degree first ---------------


def poly_eval(coeffs: Sequence[KElement], x: KElement) -> KElement:
    acc = x.tower.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_from_roots(tower: TowerSpec, roots: Sequence[KElement]) -> list[KElement]:
    """Monic polynomial prod (x - r)."""
    coeffs = [tower.one()]
    for r in roots:
        shifted = [tower.zero()] + coeffs
        for t, c in enumerate(coeffs):
            shifted[t] = shifted[t] - r * c
        coeffs = shifted
    return coeffs


def dual_multipliers(points: Sequence[KElement]) -> tuple[KElement, ...]:
    """v_i = prod_{j != i} (w_i - w_j)^-1, the GRS multipliers of the dual code."""
    if len(set(points)) != len(points):
        raise InvalidInputError("evaluation points must be pairwise distinct")
    out = []
    for i, wi in enumerate(points):
        prod = wi.tower.one()
        for j, wj in enumerate(points):
            if j != i:
                prod = prod * (wi - wj)
        out.append(inv(prod))
    return tuple(out)


@dataclass(frozen=True)
class CodeSpec:
    """An (n, k) RS code over K with evaluation points ``eval_points``.

    ``d`` is the code-wide repair degree of the main construction; the simple
    construction leaves it as None and records per-node degrees instead.
    """

    tower: TowerSpec
    n: int
    k: int
    d: int | None
    eval_points: tuple[KElement, ...]
    variant: str
    repair_degrees: tuple[int | None, ...] = ()
    dual_multipliers: tuple[KElement, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "eval_points", tuple(self.eval_points))
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown variant {self.variant!r}")
        if len(self.eval_points) != self.n:
            raise ParameterError("need one evaluation point per node")
        if not 1 <= self.k < self.n:
            raise ParameterError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.d is not None and not self.k <= self.d <= self.n - 1:
            raise ParameterError(f"need k <= d <= n-1, got d={self.d}")
        if not self.repair_degrees:
            object.__setattr__(self, "repair_degrees", (self.d,) * self.n)
        if len(self.repair_degrees) != self.n:
            raise ParameterError("need one repair degree entry per node")
        v = dual_multipliers(self.eval_points)
        if self.dual_multipliers and tuple(self.dual_multipliers) != v:
            raise InvalidInputError("dual multipliers do not match the evaluation points")
        object.__setattr__(self, "dual_multipliers", v)

    @property
    def l(self) -> int:
        """Sub-packetization: [K : F_p]."""
        return self.tower.total_degree

    @property
    def r(self) -> int:
        return self.n - self.k

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "l": self.l,
            "repair_degrees": list(self.repair_degrees),
            "tower": self.tower.to_json(),
            "eval_points": [element_to_bytes(w).hex() for w in self.eval_points],
            "dual_multipliers": [element_to_bytes(v).hex() for v in self.dual_multipliers],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CodeSpec":
        tower = TowerSpec.from_json(obj["tower"])
        pts = tuple(element_from_bytes(tower, bytes.fromhex(h)) for h in obj["eval_points"])
        v = tuple(element_from_bytes(tower, bytes.fromhex(h)) for h in obj.get("dual_multipliers", []))
        spec = cls(tower, int(obj["n"]), int(obj["k"]), obj.get("d"), pts, obj["variant"],
                   tuple(obj.get("repair_degrees") or ()), v)
        if "l" in obj and obj["l"] != spec.l:
            raise InvalidInputError(f"manifest l={obj['l']} disagrees with tower degree {spec.l}")
        return spec

    def __repr__(self):
        return f"CodeSpec({self.variant}, n={self.n}, k={self.k}, d={self.d}, l={self.l})"


@dataclass(frozen=True)
class Codeword:
    spec: CodeSpec
    symbols: tuple[KElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) != self.spec.n:
            raise InvalidInputError(f"codeword needs {self.spec.n} symbols")

    def __getitem__(self, j: int) -> KElement:
        return self.symbols[j]

    def __len__(self):
        return len(self.symbols)

    def to_json(self) -> list[str]:
        return [element_to_bytes(c).hex() for c in self.symbols]


def encode(spec: CodeSpec, message: Sequence[KElement]) -> Codeword:
    if len(message) != spec.k:
        raise InvalidInputError(f"message must have k={spec.k} symbols, got {len(message)}")
    return Codeword(spec, tuple(poly_eval(message, w) for w in spec.eval_points))


def random_message(spec: CodeSpec, rng: np.random.Generator) -> list[KElement]:
    return [spec.tower.random_element(rng) for _ in range(spec.k)]


def random_codeword(spec: CodeSpec, rng: np.random.Generator) -> Codeword:
    return encode(spec, random_message(spec, rng))


def inner_product(x: Sequence[KElement], c: Sequence[KElement]) -> KElement:
    acc = x[0].tower.zero()
    for a, b in zip(x, c, strict=True):
        acc = acc + a * b
    return acc


def dual_codeword(spec: CodeSpec, g: Sequence[KElement]) -> tuple[KElement, ...]:
    """(v_1 g(w_1), ..., v_n g(w_n)); lies in the dual code when deg g < n - k."""
    if len(g) > spec.n - spec.k:
        raise InvalidInputError(f"deg g must be below n - k = {spec.n - spec.k}")
    return tuple(v * poly_eval(g, w) for v, w in zip(spec.dual_multipliers, spec.eval_points))


@lru_cache(maxsize=256)
def _lagrange_basis(spec: CodeSpec, subset: tuple[int, ...]) -> tuple[tuple[KElement, ...], ...]:
    """Coefficient lists of the Lagrange basis polynomials for ``subset``."""
    pts = spec.eval_points
    out = []
    for a in subset:
        others = [pts[b] for b in subset if b != a]
        num = poly_from_roots(spec.tower, others)
        denom = spec.tower.one()
        for w in others:
            denom = denom * (pts[a] - w)
        scale = inv(denom)
        out.append(tuple(c * scale for c in num))
    return tuple(out)


def interpolate(spec: CodeSpec, known: Mapping[int, KElement]) -> list[KElement]:
    """Message (coefficients of f) from any k known coordinates."""
    if len(known) < spec.k:
        raise InsufficientDataError(f"need at least k={spec.k} coordinates, got {len(known)}")
    for j in known:
        if not 0 <= j < spec.n:
            raise InvalidInputError(f"coordinate {j} out of range")
    subset = tuple(sorted(known)[: spec.k])
    basis = _lagrange_basis(spec, subset)
    coeffs = [spec.tower.zero() for _ in range(spec.k)]
    for a, ell in zip(subset, basis):
        ca = known[a]
        for t, c in enumerate(ell):
            coeffs[t] = coeffs[t] + ca * c
    return coeffs


def erasure_decode(spec: CodeSpec, known: Mapping[int, KElement]) -> Codeword:
    """Recover the full codeword; extra coordinates are checked for consistency."""
    cw = encode(spec, interpolate(spec, known))
    bad = [j for j, c in known.items() if cw.symbols[j] != c]
    if bad:
        raise CorruptionError(f"known coordinates {sorted(bad)} are inconsistent with the others")
    return cw


def is_codeword(word: Codeword) -> bool:
    try:
        erasure_decode(word.spec, dict(enumerate(word.symbols)))
    except CorruptionError:
        return False
    return True


def verify_mds(spec: CodeSpec, trials: int = 10, rng: np.random.Generator | None = None,
               sample: int | None = None) -> bool:
    """Decode ``trials`` random codewords from every k-subset of coordinates.

    With ``sample`` set, only that many random k-subsets are checked.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    total = math.comb(spec.n, spec.k)
    if sample is None:
        if total > MDS_SUBSET_LIMIT:
            raise RefusalError(f"C({spec.n},{spec.k}) = {total} subsets exceeds {MDS_SUBSET_LIMIT}; "
                               "pass a sample size to check random subsets instead")
        subsets = list(itertools.combinations(range(spec.n), spec.k))
    else:
        subsets = [tuple(sorted(rng.choice(spec.n, spec.k, replace=False).tolist())) for _ in range(sample)]
    words = [random_codeword(spec, rng) for _ in range(trials)]
    for subset in subsets:
        for cw in words:
            try:
                got = erasure_decode(spec, {j: cw.symbols[j] for j in subset})
            except (CorruptionError, ZeroDivisionError):
                return False
            if got.symbols != cw.symbols:
                return False
    return True


__all__ = [
    "MAIN",
    "SIMPLE",
    "CodeSpec",
    "Codeword",
    "encode",
    "dual_multipliers",
    "dual_codeword",
    "interpolate",
    "erasure_decode",
    "is_codeword",
    "verify_mds",
    "random_codeword",
    "random_message",
    "inner_product",
    "poly_eval",
    "poly_from_roots",
]
