"""Prime fields F_p and univariate polynomials over them.

Polynomials are stored as tuples of residues, lowest degree first, trimmed
so that the leading coefficient is nonzero.  The zero polynomial is ``()``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from sympy import factorint, isprime

from .errors import InvalidInputError


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2 or not isprime(self.p):
            raise InvalidInputError(f"field modulus must be prime, got {self.p!r}")

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return pow(a, self.p - 2, self.p)

    def poly(self, coeffs: Iterable[int]) -> "Poly":
        return Poly(self, coeffs)

    def __repr__(self):
        return f"F_{self.p}"


def _trim(coeffs: Sequence[int], p: int) -> tuple[int, ...]:
    out = [c % p for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True, init=False)
class Poly:
    field: PrimeField
    coeffs: tuple[int, ...]

    def __init__(self, field: PrimeField, coeffs: Iterable[int] = ()):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", _trim(tuple(coeffs), field.p))

    @classmethod
    def x(cls, field: PrimeField) -> "Poly":
        return cls(field, (0, 1))

    @classmethod
    def const(cls, field: PrimeField, c: int) -> "Poly":
        return cls(field, (c,))

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for zero."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        c = self.field.inv(self.lead())
        return Poly(self.field, (a * c for a in self.coeffs))

    def _check(self, other: "Poly"):
        if not isinstance(other, Poly) or other.field != self.field:
            raise InvalidInputError("polynomials over different fields")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly(self.field, ((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)))

    def __neg__(self) -> "Poly":
        return Poly(self.field, (-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly(self.field)
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return Poly(self.field, out)

    def __divmod__(self, other: "Poly") -> tuple["Poly", "Poly"]:
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        rem = list(self.coeffs)
        db = other.degree
        inv_lead = self.field.inv(other.lead())
        quot = [0] * max(len(rem) - db, 0)
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i] * inv_lead % p
            if c:
                quot[i - db] = c
                for j, bj in enumerate(other.coeffs):
                    rem[i - db + j] = (rem[i - db + j] - c * bj) % p
        return Poly(self.field, quot), Poly(self.field, rem[:db] if db > 0 else ())

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __call__(self, a: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * a + c) % self.p
        return acc

    def powmod(self, e: int, modulus: "Poly") -> "Poly":
        """Return self**e mod modulus by square-and-multiply."""
        result = Poly.const(self.field, 1) % modulus
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def to_json(self) -> list[int]:
        return list(self.coeffs)

    def __repr__(self):
        if self.is_zero():
            return f"Poly(0 over {self.field})"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            coef = str(c) if (c != 1 or i == 0) else ""
            terms.append(coef + mono)
        return f"Poly({' + '.join(terms)} over {self.field})"


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd of ``f`` and ``g`` by the Euclidean algorithm."""
    f._check(g)
    if f.is_zero() and g.is_zero():
        raise InvalidInputError("gcd(0, 0) is undefined")
    a, b = f, g
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def _x_pow_p_pow(f: Poly, e: int) -> Poly:
    """x^(p^e) mod f, by e successive p-th powers."""
    r = Poly.x(f.field) % f
    for _ in range(e):
        r = r.powmod(f.p, f)
    return r


def is_irreducible(f: Poly) -> bool:
    """Rabin's irreducibility test over F_p."""
    if f.degree < 1:
        raise InvalidInputError("irreducibility is undefined for zero or constant polynomials")
    d = f.degree
    if d == 1:
        return True
    f = f.monic()
    x = Poly.x(f.field)
    if _x_pow_p_pow(f, d) != x % f:
        return False
    for t in factorint(d):
        h = _x_pow_p_pow(f, d // t) - x
        if poly_gcd(h, f).degree != 0:
            return False
    return True


def find_irreducible(field: PrimeField, degree: int) -> Poly:
    """Smallest monic irreducible polynomial of the given degree.

    Candidates are ordered by the integer whose base-p digits, least
    significant first, are the coefficients c_0, ..., c_{degree-1}.
    """
    if degree < 1:
        raise InvalidInputError("degree must be positive")
    p = field.p
    for n in range(p**degree):
        digits = []
        for _ in range(degree):
            n, r = divmod(n, p)
            digits.append(r)
        f = Poly(field, digits + [1])
        if is_irreducible(f):
            return f
    raise AssertionError("unreachable: irreducible polynomials exist in every degree")


def power_sums(f: Poly, max_exponent: int) -> tuple[int, ...]:
    """Power sums t_a = sum of rho^a over the roots rho of monic ``f``.

    Uses Newton's identities in division-free form, so the result is exact
    in F_p even when p divides some of the indices a.
    """
    if not f.is_monic():
        raise InvalidInputError("power sums need a monic polynomial")
    if max_exponent < 0:
        raise InvalidInputError("max_exponent must be non-negative")
    p, d = f.p, f.degree
    c = f.coeffs

    def coef(j: int) -> int:
        # c_j of x^d + c_{d-1} x^{d-1} + ... + c_0
        return c[j] if 0 <= j <= d else 0

    t = [d % p]
    for a in range(1, max_exponent + 1):
        acc = 0
        for j in range(1, min(a, d + 1)):
            acc += coef(d - j) * t[a - j]
        if a <= d:
            acc += a * coef(d - a)
        t.append(-acc % p)
    return tuple(t)


__all__ = [
    "PrimeField",
    "Poly",
    "poly_gcd",
    "is_irreducible",
    "find_irreducible",
    "power_sums",
]
