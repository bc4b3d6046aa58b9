from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bisidon.energy import (
    Operation,
    QuadrupleKind,
    additive_energy,
    energy_report,
    find_witness,
    is_additive_sidon,
    is_bi_sidon,
    is_multiplicative_sidon,
    multiplicative_energy,
    nontrivial_quadruples,
    sidon_energy,
)
from bisidon.lab.oracle import energy_by_enumeration

F = Fraction
small_sets = st.lists(st.integers(-40, 40).filter(bool), min_size=1, max_size=14, unique=True)
rational_sets = st.lists(
    st.fractions(min_value=-20, max_value=20, max_denominator=6).filter(bool), min_size=1, max_size=12, unique=True
)


@pytest.mark.parametrize("A, e", [([7], 1), ([1, 2, 3], 19), ([1, 2, 5, 7], 28)])
def test_additive_energy_examples(A, e):
    assert additive_energy(A) == e


@pytest.mark.parametrize("A, e", [([7], 1), ([1, 2, 3], 15), ([2, 4, 8], 19)])
def test_multiplicative_energy_examples(A, e):
    assert multiplicative_energy(A) == e


def test_empty_set():
    assert additive_energy([]) == 0 == multiplicative_energy([])
    assert is_bi_sidon([])


def test_zero_rejected_for_products():
    with pytest.raises(ValueError):
        multiplicative_energy([0, 1, 2])
    with pytest.raises(ValueError):
        is_multiplicative_sidon([0, 1])


def test_duplicates_rejected():
    with pytest.raises(ValueError):
        additive_energy([1, 2, 2])


def test_interval_energies_pick_branch_direction():
    ten = range(1, 11)
    assert additive_energy(ten) == 670
    assert multiplicative_energy(ten) < 670
    powers = [2**i for i in range(1, 11)]
    assert additive_energy(powers) == 190
    assert multiplicative_energy(powers) == 670


def test_sidon_predicate_examples():
    assert not is_additive_sidon([1, 2, 3])
    assert not is_multiplicative_sidon([2, 3, 4, 6])
    assert is_additive_sidon([1, 2, 5, 7]) and is_multiplicative_sidon([1, 2, 5, 7])
    assert not is_bi_sidon([1, 2, 3])
    assert is_bi_sidon([1, 2, 5, 7])


def test_quadruple_examples():
    (q,) = nontrivial_quadruples([2, 3, 4, 6], "product")
    assert q.elements == (2, 6, 3, 4) and q.kind is QuadrupleKind.E0
    # canonical order puts the lexicographically smaller side first
    (q,) = nontrivial_quadruples([2, 4, 8], Operation.PRODUCT)
    assert q.elements == (2, 8, 4, 4) and q.kind is QuadrupleKind.E1
    assert nontrivial_quadruples([1, 2, 5, 7], "sum") == []


def test_mixed_sign_square_relation():
    (q,) = nontrivial_quadruples([-2, 2, 3], "product")
    assert q.kind is QuadrupleKind.E2 and q.elements == (-2, -2, 2, 2)


def test_witness_for_non_sidon():
    w = find_witness([1, 2, 3], "sum")
    a, b, c, d = w.elements
    assert a + b == c + d and sorted((a, b)) != sorted((c, d))
    assert find_witness([1, 2, 5, 7], "sum") is None


@given(small_sets)
def test_energy_lower_bound_and_sidon_equivalence(A):
    n = len(A)
    for op, pred in ((Operation.SUM, is_additive_sidon), (Operation.PRODUCT, is_multiplicative_sidon)):
        e = additive_energy(A) if op is Operation.SUM else multiplicative_energy(A)
        assert e >= sidon_energy(n)
        assert (e == sidon_energy(n)) == pred(A)
        assert (nontrivial_quadruples(A, op) == []) == pred(A)


@given(rational_sets)
def test_grouped_energy_matches_enumeration(A):
    assert additive_energy(A) == energy_by_enumeration(A, "sum")
    assert multiplicative_energy(A) == energy_by_enumeration(A, "product")


@given(small_sets, st.fractions(max_denominator=9), st.fractions(max_denominator=9).filter(bool))
def test_translation_and_dilation_invariance(A, t, lam):
    e = additive_energy(A)
    assert additive_energy([a + t for a in A]) == e
    assert additive_energy([lam * a for a in A]) == e
    assert multiplicative_energy([lam * a for a in A]) == multiplicative_energy(A)


@given(small_sets)
def test_quadruples_are_valid_relations(A):
    for op in Operation:
        for q in nontrivial_quadruples(A, op):
            a, b, c, d = q.elements
            lhs, rhs = (a + b, c + d) if op is Operation.SUM else (a * b, c * d)
            assert lhs == rhs
            assert sorted((a, b)) != sorted((c, d))
            assert a <= b and c <= d and (a, b) < (c, d)
            distinct = len({a, b, c, d})
            if q.kind is QuadrupleKind.E0:
                assert distinct == 4
            elif q.kind is QuadrupleKind.E1:
                assert (a == b) != (c == d)


@given(small_sets)
def test_energy_counts_quadruples(A):
    # each unordered relation {a,b} vs {c,d} contributes r(a,b) * r(c,d) * 2 ordered quadruples
    n = len(A)
    for op in Operation:
        quads = nontrivial_quadruples(A, op)
        extra = sum(2 * (1 if a == b else 2) * (1 if c == d else 2) for a, b, c, d in (q.elements for q in quads))
        e = additive_energy(A) if op is Operation.SUM else multiplicative_energy(A)
        assert e == sidon_energy(n) + extra


def test_energy_report_fields():
    rep = energy_report([1, 2, 3])
    assert (rep.additive_energy, rep.multiplicative_energy, rep.set_size) == (19, 15, 3)


def test_large_sidon_scan_path():
    # powers of two beyond the early-exit scan size are additive Sidon
    A = [2**i for i in range(1600)]
    assert is_additive_sidon(A)
    assert not is_multiplicative_sidon(A)
