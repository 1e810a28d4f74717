from __future__ import annotations

import itertools

import numpy as np
import pytest

from rsrepair.primefield import Poly, PrimeField
from rsrepair.tower import KElement, TowerSpec, make_tower

F2 = PrimeField(2)
F3 = PrimeField(3)
F5 = PrimeField(5)


def naive_mul(x: KElement, y: KElement) -> KElement:
    """Reference product: expand monomial pairs, reduce each axis with Poly division."""
    t = x.tower
    polys = t.polys
    out = np.zeros(t.shape, dtype=np.int64)
    nz_x = list(zip(*np.nonzero(x.coeffs)))
    nz_y = list(zip(*np.nonzero(y.coeffs)))
    for a, b in itertools.product(nz_x, nz_y):
        c = int(x.coeffs[a]) * int(y.coeffs[b])
        # x^(a+b) along each axis, reduced mod that axis polynomial
        factors = []
        for ax, (ea, eb) in enumerate(zip(a, b)):
            mono = Poly(t.base, [0] * (ea + eb) + [1])
            factors.append((mono % polys[ax]).coeffs)
        for combo in itertools.product(*[list(enumerate(f)) for f in factors]):
            idx = tuple(e for e, _ in combo)
            val = c
            for _, v in combo:
                val *= v
            out[idx] += val
    return KElement(t, out % t.p)


def power_oracle(x: KElement, e: int) -> KElement:
    """x**e by plain square-and-multiply through naive_mul."""
    acc = x.tower.one()
    base = x
    while e:
        if e & 1:
            acc = naive_mul(acc, base)
        base = naive_mul(base, base)
        e >>= 1
    return acc


@pytest.fixture(scope="session")
def tower_small() -> TowerSpec:
    # L = 2 * 3 * 5 = 30 over F_2
    return make_tower(F2, [3, 5], s=2)


@pytest.fixture(scope="session")
def tower_f5() -> TowerSpec:
    # L = 30 over F_5, no top axis
    return make_tower(F5, [2, 3, 5])


@pytest.fixture(scope="session")
def tower_210() -> TowerSpec:
    return make_tower(F2, [3, 5, 7], s=2)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def main_small():
    from rsrepair.repair import build_main_construction

    # n=3, k=1, d=2, l = 2 * 3 * 5 * 7 = 210
    return build_main_construction(2, 3, 1, 2)


@pytest.fixture(scope="session")
def simple_example():
    from rsrepair.repair import build_simple_construction

    return build_simple_construction(5, 8, 3)


@pytest.fixture(scope="session")
def main_2310():
    from rsrepair.repair import build_main_construction

    return build_main_construction(2, 4, 2, 3)
