from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsrepair.errors import ConstructionError, DivisionByZeroError, InvalidInputError, NotABasisError
from rsrepair.primefield import Poly, power_sums
from rsrepair.tower import (
    KElement,
    TowerSpec,
    as_base_vector,
    element_from_bytes,
    element_nbytes,
    element_to_bytes,
    from_base_vector,
    frobenius,
    inv,
    make_tower,
    mul,
    rank_over_base,
    solve_reconstruction,
    trace_to_subfield,
)

from conftest import F2, F3, F5, naive_mul, power_oracle

seeds = st.integers(0, 2**32 - 1)


def rand(t: TowerSpec, seed: int) -> KElement:
    return t.random_element(np.random.default_rng(seed))


# -- construction -------------------------------------------------------------


def test_tower_degrees():
    assert make_tower(F2, [3, 5, 7, 11], s=2).total_degree == 2310
    assert make_tower(F5, [2, 3, 5]).total_degree == 30
    assert make_tower(F2, [3, 5, 7], s=1).s == 1


@pytest.mark.parametrize("degs,s", [([3, 3], 2), ([4], None), ([3, 5], 3), ([2, 3], 0)])
def test_tower_rejects_non_fields(degs, s):
    with pytest.raises(ConstructionError):
        make_tower(F2, degs, s=s)


def test_tower_rejects_reducible_axis():
    with pytest.raises(ConstructionError):
        TowerSpec(F2, (Poly(F2, [1, 0, 1]),))


def test_tower_json_roundtrip(tower_small):
    assert TowerSpec.from_json(tower_small.to_json()) == tower_small


# -- arithmetic -----------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(a=seeds, b=seeds)
def test_mul_matches_naive(tower_small, a, b):
    x, y = rand(tower_small, a), rand(tower_small, b)
    assert mul(x, y) == naive_mul(x, y)


@settings(max_examples=15, deadline=None)
@given(a=seeds, b=seeds)
def test_mul_matches_naive_odd_char(tower_f5, a, b):
    x, y = rand(tower_f5, a), rand(tower_f5, b)
    assert x * y == naive_mul(x, y)


@settings(max_examples=25, deadline=None)
@given(a=seeds, b=seeds, c=seeds)
def test_field_axioms(tower_small, a, b, c):
    x, y, z = (rand(tower_small, v) for v in (a, b, c))
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    assert x - x == tower_small.zero()
    assert x * tower_small.one() == x


def test_identity_and_axis_reduction(tower_small):
    t = tower_small
    x = rand(t, 7)
    assert x * t.one() == x
    a1 = t.generator(0)
    # a^p1 equals x^p1 reduced modulo the first axis polynomial
    red = (Poly(F2, [0] * 3 + [1]) % t.polys[0]).coeffs
    want = t.zero()
    for e, c in enumerate(red):
        want = want + c * t.monomial([e, 0])
    assert a1 ** 2 * a1 == want


def test_char2_difference_of_squares(tower_small):
    a, b = tower_small.generator(0), tower_small.beta()
    assert (a + b) * (a - b) == a * a - b * b == a * a + b * b


@settings(max_examples=20, deadline=None)
@given(a=seeds)
def test_inverse(tower_small, a):
    x = rand(tower_small, a)
    if not x:
        return
    assert naive_mul(x, inv(x)) == tower_small.one()


def test_inverse_examples(tower_f5, tower_small):
    assert inv(tower_small.one()) == tower_small.one()
    assert inv(tower_f5.scalar(2)) == tower_f5.scalar(3)
    for j in range(tower_small.n_axes):
        g = tower_small.generator(j)
        assert g * inv(g) == tower_small.one()
    with pytest.raises(DivisionByZeroError):
        inv(tower_small.zero())
    with pytest.raises(ZeroDivisionError):
        tower_small.one() / tower_small.zero()


def test_inverse_large_tower():
    t = make_tower(F2, [3, 5, 7, 11], s=2)
    x = t.random_element(np.random.default_rng(1))
    assert x * inv(x) == t.one()


@settings(max_examples=10, deadline=None)
@given(a=seeds)
def test_frobenius_is_pth_power(tower_small, a):
    x = rand(tower_small, a)
    assert frobenius(x) == power_oracle(x, 2)
    assert frobenius(x, 3) == power_oracle(x, 8)
    assert frobenius(x, tower_small.total_degree) == x


def test_tower_mismatch(tower_small, tower_f5):
    with pytest.raises(InvalidInputError):
        tower_small.one() * tower_f5.one()


def test_pow_negative(tower_f5):
    x = rand(tower_f5, 3)
    assert x ** -2 * x ** 2 == tower_f5.one()
    assert x ** 0 == tower_f5.one()


# -- vectors and bytes ----------------------------------------------------------


def test_base_vectors(tower_small):
    t = tower_small
    assert not as_base_vector(t.zero()).any()
    e0 = np.zeros(t.total_degree, dtype=np.int64)
    e0[0] = 1
    assert np.array_equal(as_base_vector(t.one()), e0)
    x = rand(t, 11)
    assert from_base_vector(t, as_base_vector(x)) == x
    with pytest.raises(InvalidInputError):
        from_base_vector(t, [1, 0, 1])


def test_rank_over_base(tower_small, tower_f5):
    assert rank_over_base([tower_small.zero()]) == 0
    assert rank_over_base([]) == 0
    a = tower_f5.generator(1)      # degree-3 axis
    assert rank_over_base([tower_f5.one(), a, a * a]) == 3
    assert rank_over_base([a, a + a]) == 1


@pytest.mark.parametrize("fixture", ["tower_small", "tower_f5"])
def test_bytes_roundtrip(fixture, request):
    t = request.getfixturevalue(fixture)
    x = rand(t, 5)
    raw = element_to_bytes(x)
    assert len(raw) == element_nbytes(t)
    assert element_from_bytes(t, raw) == x


def test_bytes_sizes():
    assert element_nbytes(make_tower(F2, [3, 5, 7, 11], s=2)) == 289
    assert element_nbytes(make_tower(F5, [2, 3, 5])) == 30


def test_bytes_reject_bad_input(tower_small, tower_f5):
    with pytest.raises(InvalidInputError):
        element_from_bytes(tower_small, b"\x00")
    bad = bytes([7] * element_nbytes(tower_f5))
    with pytest.raises(InvalidInputError):
        element_from_bytes(tower_f5, bad)


def test_hash_and_equality(tower_small):
    x = rand(tower_small, 1)
    y = KElement(tower_small, x.coeffs.copy())
    assert x == y and hash(x) == hash(y)
    assert len({x, y, tower_small.zero()}) == 2


# -- subfields and traces ---------------------------------------------------------


def trace_oracle(x: KElement, i: int) -> KElement:
    """sum_t x^(|F_i|^t) over t < [K:F_i], via naive repeated powering."""
    t = x.tower
    d_i = t.total_degree // (t.s * t.axis_degrees[i])
    q = t.p ** d_i
    acc = t.zero()
    cur = x
    for _ in range(t.s * t.axis_degrees[i]):
        acc = acc + cur
        cur = power_oracle(cur, q)
    return acc


@pytest.mark.parametrize("i", [0, 1])
def test_trace_matches_oracle(tower_small, i):
    view = tower_small.subfield(i)
    rng = np.random.default_rng(i)
    for _ in range(6):
        x = tower_small.random_element(rng)
        tr = trace_to_subfield(x, view)
        assert tr == trace_oracle(x, i)
        assert view.contains(tr)


def test_trace_examples(tower_small, tower_f5):
    t = tower_small
    view = t.subfield(0)
    assert trace_to_subfield(t.zero(), view) == t.zero()
    y = view.embed(np.arange(view.degree) % 2)
    ext = t.s * t.axis_degrees[0]
    assert trace_to_subfield(y, view) == y * (ext % t.p)
    v5 = tower_f5.subfield(1)
    y5 = tower_f5.generator(0) + 3
    assert trace_to_subfield(y5, v5) == y5 * 3


def test_trace_of_monomial_is_product_of_power_sums():
    t = make_tower(F2, [3, 5, 7, 11], s=2)
    view = t.subfield(0)
    x = t.generator(0) * t.beta()
    want = power_sums(t.polys[0], 1)[1] * power_sums(t.top_poly, 1)[1]
    assert trace_to_subfield(x, view) == t.scalar(want)


@settings(max_examples=15, deadline=None)
@given(a=seeds, b=seeds, i=st.integers(0, 1))
def test_trace_is_subfield_linear(tower_small, a, b, i):
    view = tower_small.subfield(i)
    x, y = rand(tower_small, a), rand(tower_small, b)
    rng = np.random.default_rng(a ^ b)
    lam = view.embed(rng.integers(0, 2, view.degree))
    assert trace_to_subfield(lam * x + y, view) == lam * trace_to_subfield(x, view) + trace_to_subfield(y, view)


def test_trace_is_onto(tower_small):
    for i in range(tower_small.n_axes):
        view = tower_small.subfield(i)
        images = [trace_to_subfield(tower_small.monomial(e, b), view)
                  for e in np.ndindex(*tower_small.axis_degrees) for b in range(tower_small.s)]
        assert rank_over_base(images) == view.degree


def test_subfield_coords_roundtrip(tower_210):
    view = tower_210.subfield(2)
    assert view.degree == 15
    c = np.random.default_rng(0).integers(0, 2, 15)
    y = view.embed(c)
    assert np.array_equal(view.coords(y), c)
    with pytest.raises(InvalidInputError):
        view.coords(tower_210.generator(2))


def test_mul_coords_matches_field(tower_210):
    view = tower_210.subfield(1)
    rng = np.random.default_rng(2)
    a, b = rng.integers(0, 2, (2, view.degree))
    prod = view.mul_coords(a, b)
    assert view.embed(prod) == view.embed(a) * view.embed(b)


# -- reconstruction -------------------------------------------------------------------


def _targets(t: TowerSpec, i: int) -> list[KElement]:
    a = t.generator(i)
    out = []
    for b in range(t.s):
        cur = t.monomial([0] * t.n_axes, b)
        for _ in range(t.axis_degrees[i]):
            out.append(cur)
            cur = cur * a
    return out


@pytest.mark.parametrize("i", [0, 1, 2])
def test_reconstruction_roundtrip_and_dual_basis(tower_210, i):
    t = tower_210
    view = t.subfield(i)
    u = _targets(t, i)
    rec = solve_reconstruction(u, view)
    rng = np.random.default_rng(i)
    for _ in range(3):
        g = t.random_element(rng)
        assert rec.recover([trace_to_subfield(w * g, view) for w in u]) == g
    assert rec.recover([t.zero()] * len(u)) == t.zero()
    theta = rec.dual_basis()
    for a, w in enumerate(u):
        for b, th in enumerate(theta):
            assert trace_to_subfield(w * th, view) == (t.one() if a == b else t.zero())


def test_reconstruction_rejects_dependent_targets(tower_210):
    view = tower_210.subfield(0)
    u = _targets(tower_210, 0)
    u[-1] = u[0]
    with pytest.raises(NotABasisError):
        solve_reconstruction(u, view)
    with pytest.raises(NotABasisError):
        solve_reconstruction(u[:-1], view)
