"""Additive and multiplicative energies, Sidon predicates, and nontrivial quadruples."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from bisidon import kernels
from bisidon.exactnum import as_rational, common_denominator, hash_key, scaled_integers


class Operation(str, Enum):
    SUM = "sum"
    PRODUCT = "product"


class QuadrupleKind(str, Enum):
    E0 = "E0"  # four distinct elements
    E1 = "E1"  # exactly one side is a doubled element
    E2 = "E2"  # a*a = b*b with b = -a; only possible for products of mixed signs


@dataclass(frozen=True)
class Quadruple:
    """b1 o b2 = b3 o b4 with {b1, b2} != {b3, b4}, canonically ordered."""

    elements: tuple[Fraction, Fraction, Fraction, Fraction]
    operation: Operation
    kind: QuadrupleKind


@dataclass(frozen=True)
class EnergyReport:
    additive_energy: int
    multiplicative_energy: int
    set_size: int


def as_set(values: Iterable) -> list[Fraction]:
    """Sorted list of exact rationals; duplicates are an error."""
    vals = [as_rational(v) for v in values]
    uniq = set(vals)
    if len(uniq) != len(vals):
        raise ValueError("input contains duplicate elements; a set is required")
    # sorting Fractions directly is slow; order by their images over a common denominator
    den = common_denominator(uniq)
    return sorted(uniq, key=lambda v: v.numerator * (den // v.denominator))


def _operation(op) -> Operation:
    return op if isinstance(op, Operation) else Operation(op)


def _check_nonzero(vals: list[Fraction]) -> None:
    if any(v == 0 for v in vals):
        raise ValueError("0 is not allowed in multiplicative contexts")


def additive_energy(A: Iterable) -> int:
    """Number of ordered (a, b, a', b') in A^4 with a + b = a' + b'."""
    ints, _ = scaled_integers(as_set(A))
    return kernels.pair_energy(ints, False)


def multiplicative_energy(A: Iterable) -> int:
    """Number of ordered (a, b, a', b') in A^4 with a b = a' b'; 0 must not be in A."""
    vals = as_set(A)
    _check_nonzero(vals)
    ints, _ = scaled_integers(vals)
    return kernels.pair_energy(ints, True)


def energy(A: Iterable, operation) -> int:
    if _operation(operation) is Operation.SUM:
        return additive_energy(A)
    return multiplicative_energy(A)


def energy_report(A: Iterable) -> EnergyReport:
    vals = as_set(A)
    return EnergyReport(additive_energy(vals), multiplicative_energy(vals), len(vals))


def sidon_energy(n: int) -> int:
    """The trivial-quadruple count 2n^2 - n, attained exactly by Sidon sets."""
    return 2 * n * n - n if n else 0


def _pair_groups(vals: list[Fraction], op: Operation) -> dict:
    groups: dict = defaultdict(list)
    for i, a in enumerate(vals):
        for b in vals[i:]:
            groups[hash_key(a + b if op is Operation.SUM else a * b)].append((a, b))
    return groups


# small sets use an early-exit pair scan, large ones the energy kernel
_SCAN_LIMIT = 1500


def _is_sidon(vals: list[Fraction], op: Operation) -> bool:
    if op is Operation.PRODUCT:
        _check_nonzero(vals)
    if len(vals) > _SCAN_LIMIT:
        return energy(vals, op) == sidon_energy(len(vals))
    ints, _ = scaled_integers(vals)
    seen = set()
    for i, a in enumerate(ints):
        for b in ints[i:]:
            s = hash_key(a + b if op is Operation.SUM else a * b)
            if s in seen:
                return False
            seen.add(s)
    return True


def is_additive_sidon(A: Iterable) -> bool:
    return _is_sidon(as_set(A), Operation.SUM)


def is_multiplicative_sidon(A: Iterable) -> bool:
    return _is_sidon(as_set(A), Operation.PRODUCT)


def is_bi_sidon(A: Iterable) -> bool:
    vals = as_set(A)
    return _is_sidon(vals, Operation.SUM) and _is_sidon(vals, Operation.PRODUCT)


def _canonical(p1: tuple, p2: tuple, op: Operation) -> Quadruple:
    first, second = (p1, p2) if p1 < p2 else (p2, p1)
    doubled = (first[0] == first[1]) + (second[0] == second[1])
    kind = (QuadrupleKind.E0, QuadrupleKind.E1, QuadrupleKind.E2)[doubled]
    return Quadruple((*first, *second), op, kind)


def nontrivial_quadruples(B: Iterable, operation) -> list[Quadruple]:
    """One canonical representative per nontrivial relation {b1,b2} vs {b3,b4}.

    Representatives satisfy b1 <= b2, b3 <= b4 and (b1, b2) < (b3, b4); the
    list is sorted by that tuple. Both sides doubled means 2a = 2b or
    a^2 = b^2, which for positive sets forces a = b, so E2 only shows up for
    products over mixed signs.
    """
    op = _operation(operation)
    vals = as_set(B)
    if op is Operation.PRODUCT:
        _check_nonzero(vals)
    out = []
    for pairs in _pair_groups(vals, op).values():
        for p1, p2 in combinations(pairs, 2):
            out.append(_canonical(p1, p2, op))
    out.sort(key=lambda q: q.elements)
    return out


def find_witness(A: Iterable, operation) -> Quadruple | None:
    """Some nontrivial quadruple of A, or None for a Sidon set.

    Scans pairs in ascending order and stops at the first repeated value.
    """
    op = _operation(operation)
    vals = as_set(A)
    if op is Operation.PRODUCT:
        _check_nonzero(vals)
    seen: dict = {}
    for i, a in enumerate(vals):
        for b in vals[i:]:
            s = hash_key(a + b if op is Operation.SUM else a * b)
            if s in seen:
                return _canonical(seen[s], (a, b), op)
            seen[s] = (a, b)
    return None
