"""Arithmetic in a composite extension K = F_p(a_1, ..., a_n)(b).

K is stored as the tensor product of the axis fields F_p[x]/(m_j) together
with one optional top axis F_p[y]/(g).  All degrees are pairwise coprime, so
the tensor product is itself a field of degree L = s * prod(p_j).  An element
is a coefficient tensor of shape (p_1, ..., p_n, s) whose entry at
(a_1, ..., a_n, b) multiplies the monomial a_1^{a_1} ... a_n^{a_n} b^b.

Subfields F_i = F_p(a_j : j != i) are visible structurally: an element lies
in F_i iff its coefficients vanish whenever a_i != 0 or b != 0.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from sympy import isprime

from .errors import (
    ConstructionError,
    DivisionByZeroError,
    InternalInconsistencyError,
    InvalidInputError,
    NotABasisError,
    SingularMatrixError,
)
from .linalg import inverse_mod_p, matmul_mod, rank_mod_p
from .primefield import Poly, PrimeField, find_irreducible, is_irreducible, power_sums


# ---------------------------------------------------------------------------
# per-axis tables, cached on the (hashable) minimal polynomial


def _xpow_table(f: Poly, count: int) -> np.ndarray:
    """Column e holds the coefficients of x^e mod f, for e < count."""
    d = f.degree
    out = np.zeros((d, count), dtype=np.int64)
    r = Poly.const(f.field, 1) % f
    x = Poly.x(f.field)
    for e in range(count):
        out[: len(r.coeffs), e] = r.coeffs
        r = (r * x) % f
    return out


@lru_cache(maxsize=None)
def _reducer(f: Poly) -> np.ndarray:
    return _xpow_table(f, 2 * f.degree - 1)


@lru_cache(maxsize=None)
def _mono_stack(f: Poly) -> np.ndarray:
    """stack[e] is the matrix of multiplication by x^e on F_p[x]/(f)."""
    d = f.degree
    table = _xpow_table(f, 2 * d - 1)
    stack = np.zeros((d, d, d), dtype=np.float64)
    for e in range(d):
        stack[e] = table[:, e:e + d]
    return stack


@lru_cache(maxsize=None)
def _frobenius_matrix(f: Poly, k: int) -> np.ndarray:
    """Matrix of z -> z^(p^k) on F_p[x]/(f); column a is the image of x^a."""
    d = f.degree
    r = Poly.x(f.field) % f
    for _ in range(k % d):
        r = r.powmod(f.p, f)
    out = np.zeros((d, d), dtype=np.int64)
    acc = Poly.const(f.field, 1) % f
    for a in range(d):
        out[: len(acc.coeffs), a] = acc.coeffs
        acc = (acc * r) % f
    return out


def _apply_axis(arr: np.ndarray, mat: np.ndarray, pos: int) -> np.ndarray:
    """Contract ``mat`` (out x in) against axis ``pos`` of ``arr``."""
    return np.moveaxis(np.tensordot(mat, arr, axes=([1], [pos])), 0, pos)


def _tensor_mul(a: np.ndarray, b: np.ndarray, polys: Sequence[Poly], p: int) -> np.ndarray:
    """Product in the tensor algebra of F_p[x]/(f) over ``polys``.

    The trailing len(polys) axes of ``a`` and ``b`` are coefficient axes;
    leading axes broadcast.
    """
    k = len(polys)
    if k == 0:
        return (a * b) % p
    axes = tuple(range(-k, 0))
    fs = tuple(2 * f.degree - 1 for f in polys)
    fa = np.fft.rfftn(a, fs, axes=axes)
    fb = np.fft.rfftn(b, fs, axes=axes)
    conv = np.fft.irfftn(fa * fb, fs, axes=axes)
    c = np.rint(conv).astype(np.int64) % p
    nd = c.ndim
    for j, f in enumerate(polys):
        if f.degree > 1:
            c = _apply_axis(c, _reducer(f), nd - k + j) % p
    return c


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TowerSpec:
    base: PrimeField
    axis_polys: tuple[Poly, ...]
    top_poly: Poly | None = None

    def __post_init__(self):
        object.__setattr__(self, "axis_polys", tuple(self.axis_polys))
        degs = [f.degree for f in self.axis_polys]
        for f in self.axis_polys + ((self.top_poly,) if self.top_poly is not None else ()):
            if f.field != self.base:
                raise ConstructionError("axis polynomial over a different field")
            if not f.is_monic() or f.degree < 1 or not is_irreducible(f):
                raise ConstructionError(f"{f} is not monic irreducible")
        if len(set(degs)) != len(degs) or not all(isprime(d) for d in degs):
            raise ConstructionError(f"axis degrees must be pairwise-distinct primes, got {degs}")
        if self.top_poly is not None:
            s = self.top_poly.degree
            if s < 2:
                raise ConstructionError("top axis must have degree at least 2 (omit it for s = 1)")
            if any(math.gcd(s, d) != 1 for d in degs):
                raise ConstructionError(f"top degree {s} is not coprime to axis degrees {degs}")

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def n_axes(self) -> int:
        return len(self.axis_polys)

    @property
    def axis_degrees(self) -> tuple[int, ...]:
        return tuple(f.degree for f in self.axis_polys)

    @property
    def s(self) -> int:
        return self.top_poly.degree if self.top_poly is not None else 1

    @cached_property
    def polys(self) -> tuple[Poly, ...]:
        """Minimal polynomials of every coefficient axis, the top axis last."""
        top = self.top_poly if self.top_poly is not None else Poly.x(self.base)
        return self.axis_polys + (top,)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.axis_degrees + (self.s,)

    @property
    def total_degree(self) -> int:
        return math.prod(self.shape)

    L = total_degree

    @cached_property
    def _axis_power_sums(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array(power_sums(f, f.degree - 1), dtype=np.int64) for f in self.polys)

    # -- element constructors ------------------------------------------------

    def zero(self) -> "KElement":
        return KElement(self, np.zeros(self.shape, dtype=np.int64))

    def scalar(self, c: int) -> "KElement":
        a = np.zeros(self.shape, dtype=np.int64)
        a.flat[0] = c
        return KElement(self, a)

    def one(self) -> "KElement":
        return self.scalar(1)

    def monomial(self, exponents: Sequence[int], b: int = 0) -> "KElement":
        """The basis monomial with axis exponents ``exponents`` and top exponent ``b``."""
        if len(exponents) != self.n_axes:
            raise InvalidInputError("one exponent per axis required")
        idx = tuple(exponents) + (b,)
        if any(not 0 <= e < d for e, d in zip(idx, self.shape)):
            raise InvalidInputError(f"monomial exponents {idx} out of range for shape {self.shape}")
        a = np.zeros(self.shape, dtype=np.int64)
        a[idx] = 1
        return KElement(self, a)

    def generator(self, j: int) -> "KElement":
        """The axis generator alpha_j (0-based)."""
        e = [0] * self.n_axes
        e[j] = 1
        return self.monomial(e)

    def beta(self) -> "KElement":
        if self.top_poly is None:
            raise InvalidInputError("tower has no top axis")
        return self.monomial([0] * self.n_axes, 1)

    def random_element(self, rng: np.random.Generator) -> "KElement":
        return KElement(self, rng.integers(0, self.p, size=self.shape))

    def subfield(self, excluded_axis: int) -> "SubfieldView":
        return SubfieldView(self, excluded_axis)

    # -- batch helpers -------------------------------------------------------

    def monomial_multiples(self, arr: np.ndarray, axes: Sequence[int],
                           trailing: Sequence[int] | None = None) -> np.ndarray:
        """Multiply a batch of elements by every monomial over ``axes``.

        ``arr`` has trailing coefficient dims for the tower axes listed in
        ``trailing`` (default: all axes, top axis = index n_axes).  The result
        gains one new leading dim per entry of ``axes`` (in that order) holding
        the exponent of that axis.
        """
        trailing = list(range(self.n_axes + 1)) if trailing is None else list(trailing)
        p = self.p
        out = np.asarray(arr, dtype=np.float64)
        for j in reversed(list(axes)):
            stack = _mono_stack(self.polys[j])
            pos = out.ndim - len(trailing) + trailing.index(j)
            out = np.tensordot(stack, out, axes=([2], [pos]))
            out = np.moveaxis(out, 1, pos + 1)
            out = np.mod(out, p)
        return out.astype(np.int64)

    def multiplication_matrix(self, c: "KElement") -> np.ndarray:
        """L x L matrix M with as_base_vector(x * c) = as_base_vector(x) @ M."""
        _check_tower(c, self)
        L = self.total_degree
        allm = self.monomial_multiples(c.coeffs, range(self.n_axes + 1))
        return allm.reshape(L, L)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "axis_polys": [f.to_json() for f in self.axis_polys],
            "top_poly": self.top_poly.to_json() if self.top_poly is not None else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TowerSpec":
        field = PrimeField(int(obj["p"]))
        top = obj.get("top_poly")
        return cls(field, tuple(Poly(field, c) for c in obj["axis_polys"]),
                   Poly(field, top) if top is not None else None)

    def __repr__(self):
        return f"TowerSpec(p={self.p}, axes={list(self.axis_degrees)}, s={self.s}, L={self.total_degree})"


def make_tower(base: PrimeField, axis_degrees: Sequence[int], s: int | None = None) -> TowerSpec:
    """Build the tower with the lexicographically smallest irreducible per axis."""
    degs = list(axis_degrees)
    if len(set(degs)) != len(degs) or not all(isinstance(d, int) and isprime(d) for d in degs):
        raise ConstructionError(f"axis degrees must be pairwise-distinct primes, got {degs}")
    if s is not None and s < 1:
        raise ConstructionError("s must be positive")
    if s is not None and s > 1 and any(math.gcd(s, d) != 1 for d in degs):
        raise ConstructionError(f"s={s} is not coprime to axis degrees {degs}")
    top = find_irreducible(base, s) if s is not None and s > 1 else None
    return TowerSpec(base, tuple(find_irreducible(base, d) for d in degs), top)


def _check_tower(x: "KElement", tower: TowerSpec):
    if not isinstance(x, KElement):
        raise InvalidInputError(f"expected a KElement, got {type(x).__name__}")
    if x.tower is not tower and x.tower != tower:
        raise InvalidInputError("elements belong to different towers")


class KElement:
    """An immutable element of K."""

    __slots__ = ("tower", "coeffs", "_hash")

    def __init__(self, tower: TowerSpec, coeffs):
        a = np.asarray(coeffs, dtype=np.int64)
        if a.shape != tower.shape:
            if a.size != tower.total_degree:
                raise InvalidInputError(f"expected {tower.total_degree} coefficients, got {a.size}")
            a = a.reshape(tower.shape)
        a = a % tower.p
        a.setflags(write=False)
        self.tower = tower
        self.coeffs = a
        self._hash = None

    def _coerce(self, other) -> "KElement":
        if isinstance(other, (int, np.integer)):
            return self.tower.scalar(int(other))
        _check_tower(other, self.tower)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        return KElement(self.tower, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return KElement(self.tower, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return KElement(self.tower, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return KElement(self.tower, self.coeffs * int(other))
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return mul(self, inv(other))

    def __pow__(self, e: int):
        if e < 0:
            return inv(self) ** (-e)
        result = self.tower.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = self.tower.scalar(int(other))
        if not isinstance(other, KElement):
            return NotImplemented
        return self.tower == other.tower and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.tower, self.coeffs.tobytes()))
        return self._hash

    def __bool__(self):
        return bool(self.coeffs.any())

    def is_scalar(self) -> bool:
        return not self.coeffs.reshape(-1)[1:].any()

    def to_bytes(self) -> bytes:
        return element_to_bytes(self)

    def __repr__(self):
        nz = np.argwhere(self.coeffs)
        if len(nz) == 0:
            return "KElement(0)"
        terms = []
        for idx in nz[:6]:
            c = int(self.coeffs[tuple(idx)])
            parts = [f"a{j + 1}^{e}" if e > 1 else f"a{j + 1}" for j, e in enumerate(idx[:-1]) if e]
            if idx[-1]:
                parts.append(f"b^{idx[-1]}" if idx[-1] > 1 else "b")
            mono = "*".join(parts) or "1"
            terms.append(mono if c == 1 else f"{c}*{mono}")
        more = " + ..." if len(nz) > 6 else ""
        return f"KElement({' + '.join(terms)}{more})"


# ---------------------------------------------------------------------------
# field operations


def mul(x: KElement, y: KElement) -> KElement:
    _check_tower(y, x.tower)
    t = x.tower
    return KElement(t, _tensor_mul(x.coeffs, y.coeffs, t.polys, t.p))


def mul_many(x: KElement, ys: Sequence[KElement]) -> list[KElement]:
    """[x * y for y in ys], sharing one forward transform of x."""
    t = x.tower
    if not ys:
        return []
    for y in ys:
        _check_tower(y, t)
    stack = np.stack([y.coeffs for y in ys])
    prod = _tensor_mul(x.coeffs[None], stack, t.polys, t.p)
    return [KElement(t, c) for c in prod]


def frobenius(x: KElement, k: int = 1) -> KElement:
    """x^(p^k), applied axis by axis (coefficients are fixed by Frobenius)."""
    t = x.tower
    c = x.coeffs
    for j, f in enumerate(t.polys):
        if f.degree > 1:
            c = _apply_axis(c, _frobenius_matrix(f, k % f.degree), j) % t.p
    return KElement(t, c)


def inv(x: KElement) -> KElement:
    """Multiplicative inverse via the norm: x^-1 = x^(r-1) / N(x), r = (p^L - 1)/(p - 1)."""
    if not isinstance(x, KElement):
        raise InvalidInputError("expected a KElement")
    if not x:
        raise DivisionByZeroError("zero has no inverse in K")
    t = x.tower
    # P(r) = prod_{u < r} x^(p^u); build P(L - 1) by doubling/increment on L - 1
    m = t.total_degree - 1
    if m == 0:
        conj_prod = t.one()
    else:
        acc, run = x, 1
        for bit in bin(m)[3:]:
            acc = acc * frobenius(acc, run)
            run *= 2
            if bit == "1":
                acc = x * frobenius(acc, 1)
                run += 1
        conj_prod = frobenius(acc, 1)
    norm = x * conj_prod
    if not norm.is_scalar():
        raise InternalInconsistencyError("norm did not land in the prime field")
    n0 = int(norm.coeffs.flat[0])
    return conj_prod * pow(n0, t.p - 2, t.p)


def as_base_vector(x: KElement) -> np.ndarray:
    """Coefficients in row-major monomial order (first axis slowest, top axis fastest)."""
    return x.coeffs.reshape(-1).copy()


def from_base_vector(tower: TowerSpec, vec) -> KElement:
    vec = np.asarray(vec)
    if vec.ndim != 1 or vec.size != tower.total_degree:
        raise InvalidInputError(f"expected a vector of length {tower.total_degree}")
    return KElement(tower, vec.reshape(tower.shape))


def rank_over_base(elements: Sequence[KElement]) -> int:
    """F_p-dimension of the span of ``elements``."""
    if not elements:
        return 0
    t = elements[0].tower
    for e in elements:
        _check_tower(e, t)
    return rank_mod_p(np.stack([e.coeffs.reshape(-1) for e in elements]), t.p)


# ---------------------------------------------------------------------------
# serialization


def _bits_per_coeff(p: int) -> int:
    return 1 if p == 2 else 8


def element_nbytes(tower: TowerSpec) -> int:
    return math.ceil(tower.total_degree * _bits_per_coeff(tower.p) / 8)


def element_to_bytes(x: KElement) -> bytes:
    vec = x.coeffs.reshape(-1)
    if x.tower.p == 2:
        return np.packbits(vec.astype(np.uint8), bitorder="little").tobytes()
    if x.tower.p >= 256:
        raise InvalidInputError("byte serialization needs p < 256")
    return vec.astype(np.uint8).tobytes()


def element_from_bytes(tower: TowerSpec, data: bytes) -> KElement:
    if len(data) != element_nbytes(tower):
        raise InvalidInputError(f"expected {element_nbytes(tower)} bytes, got {len(data)}")
    raw = np.frombuffer(data, dtype=np.uint8)
    L = tower.total_degree
    if tower.p == 2:
        bits = np.unpackbits(raw, count=L, bitorder="little")
        if L % 8 and np.unpackbits(raw, bitorder="little")[L:].any():
            raise InvalidInputError("nonzero padding bits")
        return KElement(tower, bits)
    if (raw >= tower.p).any():
        raise InvalidInputError(f"coefficient out of range for p={tower.p}")
    return KElement(tower, raw)


# ---------------------------------------------------------------------------
# subfields and traces


@dataclass(frozen=True)
class SubfieldView:
    """The subfield F_i generated by every axis except ``excluded_axis``."""

    tower: TowerSpec
    excluded_axis: int

    def __post_init__(self):
        if not 0 <= self.excluded_axis < self.tower.n_axes:
            raise InvalidInputError(f"no axis {self.excluded_axis} in {self.tower}")

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.tower.n_axes) if j != self.excluded_axis)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.tower.axis_degrees[j] for j in self.axes)

    @property
    def degree(self) -> int:
        """[F_i : F_p]"""
        return math.prod(self.shape)

    @property
    def ext_degree(self) -> int:
        """[K : F_i] = s * p_i"""
        return self.tower.s * self.tower.axis_degrees[self.excluded_axis]

    @cached_property
    def polys(self) -> tuple[Poly, ...]:
        return tuple(self.tower.polys[j] for j in self.axes)

    def contains(self, x: KElement) -> bool:
        _check_tower(x, self.tower)
        return np.count_nonzero(x.coeffs) == np.count_nonzero(self._slice(x.coeffs))

    def _slice(self, arr: np.ndarray) -> np.ndarray:
        # trailing dims are the full tower shape
        i = self.excluded_axis
        lead = arr.ndim - (self.tower.n_axes + 1)
        return arr.take(0, axis=lead + i).take(0, axis=-1)

    def coords(self, x: KElement) -> np.ndarray:
        """The d_i coefficients of an element of F_i, canonical monomial order."""
        if not self.contains(x):
            raise InvalidInputError("element does not lie in the subfield")
        return self._slice(x.coeffs).reshape(-1).copy()

    def embed(self, coords) -> KElement:
        c = np.asarray(coords, dtype=np.int64).reshape(self.shape)
        c = np.expand_dims(c, self.excluded_axis)[..., None]
        full = np.zeros(self.tower.shape, dtype=np.int64)
        full[tuple(slice(0, n) for n in c.shape)] = c
        return KElement(self.tower, full)

    def trace_coords(self, arr: np.ndarray) -> np.ndarray:
        """Batch trace: ``arr`` (..., *tower.shape) -> (..., *self.shape)."""
        t = self.tower
        i = self.excluded_axis
        out = np.tensordot(arr, t._axis_power_sums[-1], axes=([-1], [0]))
        lead = out.ndim - t.n_axes
        out = np.tensordot(out, t._axis_power_sums[i], axes=([lead + i], [0]))
        return out % t.p

    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Product of F_i elements given as (batches of) flat coordinate vectors."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        a = a.reshape(a.shape[:-1] + self.shape)
        b = b.reshape(b.shape[:-1] + self.shape)
        out = _tensor_mul(a, b, self.polys, self.tower.p)
        return out.reshape(out.shape[:out.ndim - len(self.shape)] + (self.degree,))


def trace_to_subfield(x: KElement, view: SubfieldView) -> KElement:
    """Tr_{K/F_i}(x), via power sums of the top and excluded-axis polynomials."""
    _check_tower(x, view.tower)
    return view.embed(view.trace_coords(x.coeffs))


class ReconstructionMap:
    """Inverse of gamma -> (Tr_{K/F_i}(u_w * gamma))_w for an F_i-basis u of K."""

    def __init__(self, view: SubfieldView, targets: Sequence[KElement], inverse: np.ndarray):
        self.view = view
        self.targets = tuple(targets)
        self._inverse = inverse

    def recover_coords(self, traces: np.ndarray) -> KElement:
        """``traces`` has shape (W, d_i): F_i coordinates of each trace, target order."""
        t = self.view.tower
        y = np.asarray(traces, dtype=np.int64).reshape(-1)
        if y.size != t.total_degree:
            raise InvalidInputError(f"expected {len(self.targets)} traces of {self.view.degree} coordinates")
        vec = matmul_mod(self._inverse, y[:, None], t.p)[:, 0]
        return from_base_vector(t, vec)

    def recover(self, traces: Sequence[KElement]) -> KElement:
        if len(traces) != len(self.targets):
            raise InvalidInputError(f"expected {len(self.targets)} traces, got {len(traces)}")
        return self.recover_coords(np.stack([self.view.coords(y) for y in traces]))

    def dual_basis(self) -> list[KElement]:
        """theta_w with Tr(u_w theta_w') = [w == w']."""
        t = self.view.tower
        d = self.view.degree
        cols = self._inverse[:, ::d].T
        return [from_base_vector(t, c) for c in cols]


def _reconstruction_matrix(targets: Sequence[KElement], view: SubfieldView) -> np.ndarray:
    """L x L matrix of gamma -> (F_i coords of Tr(u_w gamma))_w over F_p.

    Uses Tr(u * mu * z) = mu * Tr(u * z) for F_i monomials mu, so only the
    [K:F_i]^2 traces Tr(u_w z) over z = a_i^e b^f are formed explicitly.
    """
    t = view.tower
    i = view.excluded_axis
    top = t.n_axes
    U = np.stack([u.coeffs for u in targets])                      # (W, *shape)
    UZ = t.monomial_multiples(U, [i, top])                          # (e_i, e_top, W, *shape)
    G = view.trace_coords(UZ)                                       # (e_i, e_top, W, *Fi)
    fi_axes = list(view.axes)
    GM = t.monomial_multiples(G, fi_axes, trailing=fi_axes)         # (mu..., e_i, e_top, W, nu...)
    nf = len(fi_axes)
    # current dims: mu_0..mu_{nf-1}, e_i, e_top, W, nu_0..nu_{nf-1}
    w_dim = nf + 2
    nu_dims = list(range(nf + 3, 2 * nf + 3))
    col_dims = []
    for j in range(t.n_axes + 1):
        if j == i:
            col_dims.append(nf)
        elif j == top:
            col_dims.append(nf + 1)
        else:
            col_dims.append(fi_axes.index(j))
    A = np.transpose(GM, [w_dim] + nu_dims + col_dims)
    L = t.total_degree
    if A.size != L * L:
        raise NotABasisError(f"need exactly [K:F_i] = {view.ext_degree} targets")
    return A.reshape(L, L)


@lru_cache(maxsize=32)
def _cached_reconstruction(view: SubfieldView, targets: tuple[KElement, ...]) -> ReconstructionMap:
    A = _reconstruction_matrix(targets, view)
    try:
        Ainv = inverse_mod_p(A, view.tower.p)
    except SingularMatrixError as exc:
        raise NotABasisError(f"targets do not form an F_i-basis of K: {exc}") from None
    if view.tower.p < 256:
        Ainv = Ainv.astype(np.uint8)
    return ReconstructionMap(view, targets, Ainv)


_cache_lock = threading.Lock()


def solve_reconstruction(targets: Sequence[KElement], view: SubfieldView) -> ReconstructionMap:
    """Precompute the map (Tr(u_w gamma))_w -> gamma for targets u_1..u_W.

    Raises NotABasisError unless the targets form an F_i-basis of K.
    """
    targets = tuple(targets)
    for u in targets:
        _check_tower(u, view.tower)
    if len(targets) != view.ext_degree:
        raise NotABasisError(f"need exactly [K:F_i] = {view.ext_degree} targets, got {len(targets)}")
    with _cache_lock:
        return _cached_reconstruction(view, targets)


__all__ = [
    "TowerSpec",
    "KElement",
    "SubfieldView",
    "ReconstructionMap",
    "make_tower",
    "mul",
    "mul_many",
    "inv",
    "frobenius",
    "trace_to_subfield",
    "as_base_vector",
    "from_base_vector",
    "rank_over_base",
    "solve_reconstruction",
    "element_to_bytes",
    "element_from_bytes",
    "element_nbytes",
]
