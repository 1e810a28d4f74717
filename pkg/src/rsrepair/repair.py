"""Cut-set-optimal trace repair for the two RS constructions.

Node i is repaired over the subfield F_i, which contains every evaluation
point except w_i.  With h the annihilator of the non-helper points and
targets u_{m,t} = e_m w_i^t v_i h(w_i) forming an F_i-basis of K, each helper
j sends Tr_i(e_m v_j h(w_j) c_j) for every basis element e_m, and

    Tr_i(u_{m,t} c_i) = -sum_{j in R} w_j^t Tr_i(e_m v_j h(w_j) c_j).

The main construction uses the p_i-element subspace basis (e_m) built below
with t < s; the simple construction uses e = (1,) with t < p_i.

Node indices are 0-based throughout.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Protocol, Sequence

import numpy as np
from sympy import nextprime, prime, primepi

from .errors import (
    CorruptionError,
    InternalInconsistencyError,
    InvalidInputError,
    ParameterError,
    ProtocolError,
)
from .linalg import rank_mod_p
from .grs import MAIN, SIMPLE, CodeSpec, Codeword, erasure_decode, poly_eval, poly_from_roots
from .primefield import PrimeField
from .tower import (
    KElement,
    ReconstructionMap,
    SubfieldView,
    make_tower,
    mul_many,
    solve_reconstruction,
)


# -- bounds -------------------------------------------------------------------


def cutset_bound(d: int, k: int, l: int) -> Fraction:
    """Minimum repair bandwidth d*l/(d+1-k), in base-field symbols."""
    if d < k:
        raise ParameterError(f"need d >= k, got d={d}, k={k}")
    if l < 1:
        raise ParameterError("l must be positive")
    return Fraction(d * l, d + 1 - k)


def trivial_bandwidth(k: int, l: int) -> int:
    """Download k whole nodes and decode."""
    return k * l


def lower_bound_subpacketization(k: int) -> int:
    """Product of the first k-1 primes: least l for a scalar linear MSR code."""
    if k < 1:
        raise ParameterError("k must be positive")
    return math.prod(prime(t) for t in range(1, k))


# -- constructions --------------------------------------------------------------


def select_primes(s: int, n: int) -> list[int]:
    """The n smallest primes congruent to 1 mod s."""
    if s < 1 or n < 1:
        raise ParameterError("s and n must be positive")
    out = []
    q = 1
    while len(out) < n:
        q = nextprime(q)
        if (q - 1) % s == 0:
            out.append(int(q))
    return out


def build_main_construction(p: int, n: int, k: int, d: int) -> CodeSpec:
    """(n, k) RS code over K repairable from any d helpers at the cut-set bound."""
    if not 1 <= k < d < n:
        raise ParameterError(f"need 1 <= k < d < n, got n={n}, k={k}, d={d}")
    s = d - k + 1
    primes = select_primes(s, n)
    tower = make_tower(PrimeField(p), primes, s)
    points = tuple(tower.generator(j) for j in range(n))
    return CodeSpec(tower, n, k, d, points, MAIN)


def build_simple_construction(q: int, n: int, k: int) -> CodeSpec:
    """(n, k) RS code in which the first pi(n-k) nodes have optimal repair.

    Node i < pi(r) is repaired from p_i + k - 1 helpers (p_i the (i+1)-th prime).
    """
    r = n - k
    if k < 1 or r < 2:
        raise ParameterError(f"need k >= 1 and n - k >= 2, got n={n}, k={k}")
    m = int(primepi(r))
    if q < n - m:
        raise ParameterError(f"F_{q} cannot supply {n - m} distinct scalar evaluation points")
    field = PrimeField(q)
    primes = [int(prime(t)) for t in range(1, m + 1)]
    tower = make_tower(field, primes)
    points = tuple(tower.generator(j) for j in range(m)) + tuple(tower.scalar(c) for c in range(n - m))
    degrees = tuple(pi + k - 1 for pi in primes) + (None,) * (n - m)
    return CodeSpec(tower, n, k, None, points, SIMPLE, degrees)


# -- repair subspaces -----------------------------------------------------------


@dataclass(frozen=True)
class RepairBasis:
    """Basis (e_m) of the repair subspace for one node, with its targets e_m w_i^t."""

    node: int
    view: SubfieldView
    basis: tuple[KElement, ...]
    powers: int
    targets: tuple[KElement, ...] = field(repr=False)

    @property
    def subspace_rank(self) -> int:
        """F_p-rank of basis * (F_i monomials); equals len(basis) * [F_i:F_p]."""
        return _span_rank(self.view, self.basis)

    @property
    def target_rank(self) -> int:
        return _span_rank(self.view, self.targets)


def _fi_multiples(view: SubfieldView, elements: Sequence[KElement]) -> np.ndarray:
    """Rows: every element times every F_i monomial, as base vectors."""
    t = view.tower
    arr = np.stack([e.coeffs for e in elements])
    mult = t.monomial_multiples(arr, view.axes)
    return mult.reshape(-1, t.total_degree)


def _span_rank(view: SubfieldView, elements: Sequence[KElement]) -> int:
    return rank_mod_p(_fi_multiples(view, elements), view.tower.p)


def _check_node(spec: CodeSpec, i: int):
    if not 0 <= i < spec.n:
        raise InvalidInputError(f"node {i} out of range for n={spec.n}")


def lemma1_basis(spec: CodeSpec, i: int, check: bool = True) -> RepairBasis:
    """Basis of S_i = span(b^u a_i^(u+qs)) + span(sum_t b^t a_i^(p_i - 1)) over F_i."""
    if spec.variant != MAIN:
        raise ParameterError("the subspace basis is defined for the main construction")
    _check_node(spec, i)
    t = spec.tower
    s = t.s
    pi = t.axis_degrees[i]
    view = t.subfield(i)
    zeros = [0] * t.n_axes

    def mono(a: int, b: int) -> KElement:
        e = list(zeros)
        e[i] = a
        return t.monomial(e, b)

    basis = []
    for u in range(s):
        for q in range((pi - 1) // s):
            basis.append(mono(u + q * s, u))
    tail = t.zero()
    for b in range(s):
        tail = tail + mono(pi - 1, b)
    basis.append(tail)
    alpha = spec.eval_points[i]
    rb = RepairBasis(i, view, tuple(basis), s, _targets(basis, alpha, s))
    if check:
        _check_basis(rb, len(basis) * view.degree)
    return rb


def simple_basis(spec: CodeSpec, i: int, check: bool = True) -> RepairBasis:
    if spec.variant != SIMPLE:
        raise ParameterError("simple_basis is for the simple construction")
    _check_node(spec, i)
    if spec.repair_degrees[i] is None:
        raise ParameterError(f"node {i} has no nontrivial optimal repair scheme")
    t = spec.tower
    view = t.subfield(i)
    pi = t.axis_degrees[i]
    basis = (t.one(),)
    rb = RepairBasis(i, view, basis, pi, _targets(basis, spec.eval_points[i], pi))
    if check:
        _check_basis(rb, view.degree)
    return rb


def _targets(basis: Sequence[KElement], alpha: KElement, powers: int) -> tuple[KElement, ...]:
    out = []
    for e in basis:
        x = e
        for _ in range(powers):
            out.append(x)
            x = x * alpha
    return tuple(out)


def _check_basis(rb: RepairBasis, want_subspace_rank: int):
    t = rb.view.tower
    got = rb.subspace_rank
    if got != want_subspace_rank:
        raise InternalInconsistencyError(f"node {rb.node}: subspace rank {got} != {want_subspace_rank}")
    got = rb.target_rank
    if got != t.total_degree:
        raise InternalInconsistencyError(f"node {rb.node}: targets span rank {got} != L={t.total_degree}")


def repair_basis(spec: CodeSpec, i: int) -> RepairBasis:
    return lemma1_basis(spec, i) if spec.variant == MAIN else simple_basis(spec, i)


def required_helpers(spec: CodeSpec, i: int) -> int:
    _check_node(spec, i)
    d = spec.repair_degrees[i]
    if d is None:
        raise ParameterError(f"node {i} has no nontrivial optimal repair scheme")
    return d


def _check_helpers(spec: CodeSpec, i: int, helpers: Sequence[int]) -> tuple[int, ...]:
    _check_node(spec, i)
    R = tuple(sorted(helpers))
    if i in R:
        raise InvalidInputError(f"failed node {i} cannot be its own helper")
    if len(set(R)) != len(R) or any(not 0 <= j < spec.n for j in R):
        raise InvalidInputError(f"invalid helper set {list(helpers)}")
    return R


def annihilator(spec: CodeSpec, i: int, helpers: Sequence[int]) -> list[KElement]:
    """h(x) = prod over nodes outside R and {i} of (x - w_j), coefficients low first."""
    R = _check_helpers(spec, i, helpers)
    outside = [spec.eval_points[j] for j in range(spec.n) if j != i and j not in R]
    return poly_from_roots(spec.tower, outside)


# -- the protocol ----------------------------------------------------------------


class Helper(Protocol):
    """A surviving node answering trace queries about its own symbol.

    ``answer`` returns Tr_{K/F_i}(kappa * c_j) for each multiplier kappa.
    """

    def answer(self, view: SubfieldView, multipliers: Sequence[KElement]) -> Sequence[KElement]:
        ...


class SymbolHelper:
    """Helper backed by an in-memory symbol."""

    def __init__(self, symbol: KElement):
        self.symbol = symbol

    def answer(self, view, multipliers):
        prods = mul_many(self.symbol, list(multipliers))
        arr = view.trace_coords(np.stack([x.coeffs for x in prods]))
        return [view.embed(a) for a in arr]


@dataclass(frozen=True)
class RepairPlan:
    spec: CodeSpec
    node: int
    helpers: tuple[int, ...]
    basis: RepairBasis
    multipliers: dict = field(repr=False)           # j -> (e_m v_j h(w_j))_m
    point_powers: dict = field(repr=False)          # j -> (w_j^t coords)_t
    reconstruction: ReconstructionMap = field(repr=False)

    @property
    def view(self) -> SubfieldView:
        return self.basis.view


@lru_cache(maxsize=64)
def _plan(spec: CodeSpec, i: int, R: tuple[int, ...]) -> RepairPlan:
    basis = repair_basis(spec, i)
    view = basis.view
    h = annihilator(spec, i, R)
    v = spec.dual_multipliers
    w = spec.eval_points
    mults = {}
    powers = {}
    for j in R:
        vh = v[j] * poly_eval(h, w[j])
        mults[j] = tuple(e * vh for e in basis.basis)
        acc = spec.tower.one()
        pw = []
        for _ in range(basis.powers):
            pw.append(view.coords(acc))
            acc = acc * w[j]
        powers[j] = np.stack(pw)
    scale = v[i] * poly_eval(h, w[i])
    targets = [u * scale for u in basis.targets]
    recon = solve_reconstruction(targets, view)
    return RepairPlan(spec, i, R, basis, mults, powers, recon)


_plan_lock = threading.Lock()


def validate_helpers(spec: CodeSpec, i: int, helpers: Sequence[int]) -> tuple[int, ...]:
    """Sorted helper tuple, checked for size and membership."""
    R = _check_helpers(spec, i, helpers)
    need = required_helpers(spec, i)
    if len(R) != need:
        raise ParameterError(f"node {i} must be repaired from exactly {need} helpers, got {len(R)}")
    return R


def repair_plan(spec: CodeSpec, i: int, helpers: Sequence[int]) -> RepairPlan:
    R = validate_helpers(spec, i, helpers)
    with _plan_lock:
        return _plan(spec, i, R)


@dataclass
class RepairTranscript:
    failed_node: int
    helpers: tuple[int, ...]
    payloads: dict[int, list[np.ndarray]] = field(repr=False)
    symbols_per_helper: dict[int, int]
    total: int
    cutset: Fraction
    trivial: int
    subfield_degree: int
    wall_clock: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.total == self.cutset

    def to_json(self) -> dict:
        return {
            "failed_node": self.failed_node,
            "helpers": list(self.helpers),
            "symbols_per_helper": {str(j): c for j, c in self.symbols_per_helper.items()},
            "total": self.total,
            "cutset_bound": {"numerator": self.cutset.numerator, "denominator": self.cutset.denominator},
            "trivial_bound": self.trivial,
            "wall_clock_seconds": self.wall_clock,
        }


def repair(spec: CodeSpec, i: int, helpers: Sequence[int],
           access: Mapping[int, Helper] | Codeword,
           verify_with: Mapping[int, KElement] | None = None) -> tuple[KElement, RepairTranscript]:
    """Regenerate c_i from the trace answers of the helper nodes.

    ``access`` maps helper index to a Helper (a Codeword is wrapped in
    SymbolHelpers for convenience).  With ``verify_with`` (at least k full
    coordinates, not counted as bandwidth) the result is cross-checked by
    erasure decoding.
    """
    start = time.perf_counter()
    plan = repair_plan(spec, i, helpers)
    view = plan.view
    if isinstance(access, Codeword):
        cw = access
        access = {j: SymbolHelper(cw.symbols[j]) for j in plan.helpers}
    W = len(plan.basis.basis)
    T = plan.basis.powers
    di = view.degree
    rhs = np.zeros((W, T, di), dtype=np.int64)
    payloads = {}
    counts = {}
    for j in plan.helpers:
        answers = list(access[j].answer(view, plan.multipliers[j]))
        if len(answers) != W:
            raise ProtocolError(f"helper {j} sent {len(answers)} symbols, expected {W}")
        coords = []
        for a in answers:
            if not isinstance(a, KElement) or a.tower != spec.tower or not view.contains(a):
                raise ProtocolError(f"helper {j} sent a symbol outside F_{i}")
            coords.append(view.coords(a))
        payloads[j] = coords
        counts[j] = sum(c.size for c in coords)
        sigma = np.stack(coords)                                   # (W, di)
        rhs += view.mul_coords(plan.point_powers[j][None, :, :], sigma[:, None, :])
    traces = (-rhs) % spec.tower.p                                 # (W, T, di), target order (m, t)
    c_i = plan.reconstruction.recover_coords(traces.reshape(W * T, di))
    if verify_with is not None:
        known = dict(verify_with)
        known[i] = c_i
        try:
            erasure_decode(spec, known)
        except CorruptionError:
            raise CorruptionError(f"repaired symbol of node {i} is inconsistent with the codeword") from None
    total = sum(counts.values())
    transcript = RepairTranscript(
        failed_node=i,
        helpers=plan.helpers,
        payloads=payloads,
        symbols_per_helper=counts,
        total=total,
        cutset=cutset_bound(len(plan.helpers), spec.k, spec.l),
        trivial=trivial_bandwidth(spec.k, spec.l),
        subfield_degree=di,
        wall_clock=time.perf_counter() - start,
    )
    return c_i, transcript


__all__ = [
    "cutset_bound",
    "trivial_bandwidth",
    "lower_bound_subpacketization",
    "select_primes",
    "build_main_construction",
    "build_simple_construction",
    "RepairBasis",
    "lemma1_basis",
    "simple_basis",
    "repair_basis",
    "annihilator",
    "required_helpers",
    "Helper",
    "SymbolHelper",
    "RepairPlan",
    "repair_plan",
    "validate_helpers",
    "RepairTranscript",
    "repair",
]
