"""Dual-codeword certificates for linear repair schemes.

A family P of l = [K:F_p] dual codewords certifies a linear repair scheme of
node i over F_p iff the i-th coordinates of P span K over F_p; the scheme's
bandwidth is then the sum over j != i of the F_p-rank of the j-th
coordinates.  ``verify`` recomputes all of this from the raw rows, never from
repair-module state, so it can serve as an oracle for the repair transcript.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, NotARepairSchemeError
from .grs import CodeSpec, poly_eval, poly_from_roots, random_codeword
from .linalg import matmul_mod, rank_mod_p
from .primefield import PrimeField
from .repair import annihilator, repair_basis, validate_helpers
from .tower import KElement, element_from_bytes, element_to_bytes


@dataclass(frozen=True)
class DualFamily:
    """``rows[r, j]`` is the base vector of coordinate j of dual codeword r."""

    spec: CodeSpec
    node: int
    rows: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.asarray(self.rows) % self.spec.tower.p
        if self.spec.tower.p < 256:
            rows = rows.astype(np.uint8)
        if rows.ndim != 3 or rows.shape[1:] != (self.spec.n, self.spec.l):
            raise InvalidInputError(f"rows must have shape (count, {self.spec.n}, {self.spec.l})")
        if not 0 <= self.node < self.spec.n:
            raise InvalidInputError(f"node {self.node} out of range")
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return self.rows.shape[0]

    def row(self, r: int) -> list[KElement]:
        t = self.spec.tower
        return [KElement(t, v) for v in self.rows[r]]

    def without_row(self, r: int) -> "DualFamily":
        return DualFamily(self.spec, self.node, np.delete(self.rows, r, axis=0))

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "rows": [[element_to_bytes(x).hex() for x in self.row(r)] for r in range(len(self))],
        }

    @classmethod
    def from_json(cls, spec: CodeSpec, obj: dict) -> "DualFamily":
        t = spec.tower
        rows = [[element_from_bytes(t, bytes.fromhex(h)).coeffs.reshape(-1) for h in row] for row in obj["rows"]]
        return cls(spec, int(obj["node"]), np.array(rows, dtype=np.int64).reshape(-1, spec.n, spec.l))


@dataclass(frozen=True)
class GWCertificate:
    node: int
    bandwidth: int
    coordinate_rank: int
    column_ranks: dict[int, int]

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "bandwidth": self.bandwidth,
            "coordinate_rank": self.coordinate_rank,
            "column_ranks": {str(j): r for j, r in self.column_ranks.items()},
        }


def check_dual(family: DualFamily, random_checks: int = 0, rng: np.random.Generator | None = None) -> None:
    """Raise unless every row is orthogonal to each generator row (w_j^t)_j, t < k.

    Orthogonality to the generator already covers every codeword; set
    ``random_checks`` to also test against that many random codewords.
    """
    spec = family.spec
    t = spec.tower
    p = t.p
    rows = family.rows
    for deg in range(spec.k):
        acc = np.zeros((len(family), spec.l), dtype=np.int64)
        for j, w in enumerate(spec.eval_points):
            if deg == 0:
                acc += rows[:, j, :]
            else:
                acc += matmul_mod(rows[:, j, :], t.multiplication_matrix(w ** deg), p)
        bad = np.flatnonzero((acc % p).any(axis=1))
        if bad.size:
            raise InvalidInputError(f"row {int(bad[0])} is not a dual codeword (fails against x^{deg})")
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(random_checks):
        cw = random_codeword(spec, rng)
        acc = np.zeros((len(family), spec.l), dtype=np.int64)
        for j, c in enumerate(cw.symbols):
            acc += matmul_mod(rows[:, j, :], t.multiplication_matrix(c), p)
        bad = np.flatnonzero((acc % p).any(axis=1))
        if bad.size:
            raise InvalidInputError(f"row {int(bad[0])} is not orthogonal to a random codeword")


def verify(family: DualFamily, repair_field: PrimeField | None = None, random_checks: int = 0) -> GWCertificate:
    """Certify the repair scheme given by ``family`` and return its bandwidth."""
    spec = family.spec
    if repair_field is not None and repair_field != spec.tower.base:
        raise InvalidInputError(f"repair field {repair_field} is not the tower base {spec.tower.base}")
    check_dual(family, random_checks)
    p = spec.tower.p
    i = family.node
    l = spec.l
    rank_i = rank_mod_p(family.rows[:, i, :], p)
    if rank_i < l:
        raise NotARepairSchemeError(f"coordinate {i} has rank {rank_i} < l = {l}", rank_i, l)
    cols = {j: rank_mod_p(family.rows[:, j, :], p) for j in range(spec.n) if j != i}
    return GWCertificate(i, sum(cols.values()), rank_i, cols)


def family_from_repair(spec: CodeSpec, i: int, helpers: Sequence[int]) -> DualFamily:
    """The l dual codewords mu * e_m * (v_j w_j^t h(w_j))_j behind a trace repair.

    mu runs over the F_i monomials and (m, t) over the repair targets, giving
    exactly [K:F_i] * [F_i:F_p] = l rows.
    """
    R = validate_helpers(spec, i, helpers)
    basis = repair_basis(spec, i)
    view = basis.view
    t = spec.tower
    h = annihilator(spec, i, R)
    w = spec.eval_points
    vh = [v * poly_eval(h, wj) for v, wj in zip(spec.dual_multipliers, w)]
    base = []                                     # (W, n, *shape), W in (m, t) order
    for e in basis.basis:
        cur = [e * x for x in vh]
        for _ in range(basis.powers):
            base.append(np.stack([c.coeffs for c in cur]))
            cur = [c * wj for c, wj in zip(cur, w)]
    base = np.stack(base)
    mult = t.monomial_multiples(base, view.axes)  # (mu..., W, n, *shape)
    rows = mult.reshape(-1, spec.n, spec.l)
    return DualFamily(spec, i, rows)


def trivial_family(spec: CodeSpec, i: int, helpers: Sequence[int]) -> DualFamily:
    """Family for repair by downloading k whole nodes ``helpers``.

    Uses one dual codeword supported on helpers + {i} (possible since the dual
    code has minimum distance k + 1), scaled by every monomial of K.
    """
    helpers = sorted(helpers)
    if len(helpers) != spec.k or i in helpers:
        raise InvalidInputError(f"need k={spec.k} helpers distinct from node {i}")
    t = spec.tower
    outside = [spec.eval_points[j] for j in range(spec.n) if j != i and j not in helpers]
    h = poly_from_roots(t, outside)
    x = [spec.dual_multipliers[j] * poly_eval(h, spec.eval_points[j]) for j in range(spec.n)]
    base = np.stack([c.coeffs for c in x])
    mult = t.monomial_multiples(base, range(t.n_axes + 1))
    return DualFamily(spec, i, mult.reshape(-1, spec.n, spec.l))


__all__ = ["DualFamily", "GWCertificate", "verify", "check_dual", "family_from_repair", "trivial_family"]
