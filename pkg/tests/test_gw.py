from __future__ import annotations

import json

import numpy as np
import pytest

from rsrepair.errors import InvalidInputError, NotARepairSchemeError
from rsrepair.grs import random_codeword
from rsrepair.gw import DualFamily, check_dual, family_from_repair, trivial_family, verify
from rsrepair.primefield import PrimeField
from rsrepair.repair import repair


@pytest.mark.parametrize("i,R,total", [(0, (1, 2, 3, 4), 60), (1, (0, 2, 3, 4, 5), 50),
                                       (2, (0, 1, 3, 4, 5, 6, 7), 42), (0, (3, 4, 6, 7), 60)])
def test_gw_agrees_with_transcript_simple(simple_example, rng, i, R, total):
    fam = family_from_repair(simple_example, i, R)
    assert len(fam) == simple_example.l
    cert = verify(fam)
    _, tr = repair(simple_example, i, R, random_codeword(simple_example, rng))
    assert cert.bandwidth == tr.total == total
    assert cert.coordinate_rank == simple_example.l
    assert set(cert.column_ranks) == set(range(8)) - {i}


@pytest.mark.parametrize("i", [0, 1, 2])
def test_gw_main_small(main_small, i):
    R = [j for j in range(3) if j != i]
    cert = verify(family_from_repair(main_small, i, R))
    # (n-1) l / s with each column of rank l / s
    assert cert.bandwidth == 210
    assert set(cert.column_ranks.values()) == {105}


def test_duplicated_row_fails(simple_example):
    fam = family_from_repair(simple_example, 0, (1, 2, 3, 4))
    rows = fam.rows.copy()
    rows[-1] = rows[0]
    with pytest.raises(NotARepairSchemeError) as exc:
        verify(DualFamily(simple_example, 0, rows))
    assert exc.value.achieved_rank == simple_example.l - 1


def test_dropping_a_row_fails(main_small):
    fam = family_from_repair(main_small, 0, (1, 2)).without_row(5)
    with pytest.raises(NotARepairSchemeError):
        verify(fam)


def test_every_row_is_needed(simple_example):
    fam = family_from_repair(simple_example, 1, (0, 2, 3, 4, 5))
    for r in range(len(fam)):
        with pytest.raises(NotARepairSchemeError):
            verify(fam.without_row(r))


def test_random_codeword_checks(main_small, simple_example):
    fam = family_from_repair(main_small, 1, (0, 2))
    assert verify(fam, random_checks=2).bandwidth == 210
    rows = family_from_repair(simple_example, 0, (1, 2, 3, 4)).rows.astype(np.int64)
    rows[0, 6, 2] += 1
    with pytest.raises(InvalidInputError):
        check_dual(DualFamily(simple_example, 0, rows), random_checks=3)


def test_wrong_node_fails(simple_example):
    fam = family_from_repair(simple_example, 0, (1, 2, 3, 4))
    with pytest.raises(NotARepairSchemeError):
        verify(DualFamily(simple_example, 1, fam.rows))


def test_non_dual_row_rejected(simple_example):
    fam = family_from_repair(simple_example, 0, (1, 2, 3, 4))
    rows = fam.rows.astype(np.int64)
    rows[3, 5, 0] += 1
    with pytest.raises(InvalidInputError):
        check_dual(DualFamily(simple_example, 0, rows))


def test_trivial_family(simple_example, main_small):
    cert = verify(trivial_family(simple_example, 0, [1, 2, 3]))
    assert cert.bandwidth == 3 * 30
    assert sorted(j for j, r in cert.column_ranks.items() if r) == [1, 2, 3]
    assert verify(trivial_family(main_small, 2, [0])).bandwidth == 210
    with pytest.raises(InvalidInputError):
        trivial_family(simple_example, 0, [1, 2])


def test_repair_field_must_match(simple_example):
    fam = family_from_repair(simple_example, 1, (0, 2, 3, 4, 5))
    with pytest.raises(InvalidInputError):
        verify(fam, PrimeField(2))
    assert verify(fam, PrimeField(5)).bandwidth == 50


def test_family_json_roundtrip(simple_example):
    fam = family_from_repair(simple_example, 2, (0, 1, 3, 4, 5, 6, 7))
    obj = json.loads(json.dumps(fam.to_json()))
    again = DualFamily.from_json(simple_example, obj)
    assert np.array_equal(again.rows, fam.rows)
    cert = verify(again)
    assert cert.to_json()["bandwidth"] == 42
