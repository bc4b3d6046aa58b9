"""Brute-force oracles for small sets."""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterable

from bisidon.energy import Operation, _operation, as_set
from bisidon.exactnum import scaled_integers

DEFAULT_ORACLE_LIMIT = 24
ENUMERATION_LIMIT = 30


class OracleLimitError(ValueError):
    """Input is larger than the brute-force search allows."""


def energy_by_enumeration(A: Iterable, operation) -> int:
    """Count ordered quadruples in A^4 directly, O(|A|^4)."""
    op = _operation(operation)
    vals = as_set(A)
    if len(vals) > ENUMERATION_LIMIT:
        raise OracleLimitError(f"|A| = {len(vals)} exceeds the enumeration cap {ENUMERATION_LIMIT}")
    if op is Operation.PRODUCT and any(v == 0 for v in vals):
        raise ValueError("0 is not allowed in multiplicative contexts")
    ints, _ = scaled_integers(vals)
    if op is Operation.SUM:
        return sum(1 for a, b, c, d in product(ints, repeat=4) if a + b == c + d)
    return sum(1 for a, b, c, d in product(ints, repeat=4) if a * b == c * d)


def max_bi_sidon_exact(A: Iterable, limit: int = DEFAULT_ORACLE_LIMIT) -> tuple[Fraction, ...]:
    """A maximum bi-Sidon subset by depth-first branch and bound.

    Elements are taken in ascending order, include-branch first, and the
    incumbent only changes on a strict improvement, so among optimal subsets
    the lexicographically smallest (as sorted tuples) is returned.
    """
    vals = as_set(A)
    if len(vals) > limit:
        raise OracleLimitError(f"|A| = {len(vals)} exceeds the oracle limit {limit}")
    if any(v == 0 for v in vals):
        raise ValueError("0 is not allowed in multiplicative contexts")
    ints, _ = scaled_integers(vals)
    n = len(ints)
    best: list[int] = []
    chosen: list[int] = []
    sums: set[int] = set()
    prods: set[int] = set()

    def search(i: int) -> None:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
        if i == n or len(chosen) + (n - i) <= len(best):
            return
        x = ints[i]
        new_sums = [x + y for y in chosen] + [2 * x]
        new_prods = [x * y for y in chosen] + [x * x]
        if sums.isdisjoint(new_sums) and prods.isdisjoint(new_prods):
            chosen.append(x)
            sums.update(new_sums)
            prods.update(new_prods)
            search(i + 1)
            chosen.pop()
            sums.difference_update(new_sums)
            prods.difference_update(new_prods)
        search(i + 1)

    search(0)
    index = {a: v for a, v in zip(ints, vals)}
    return tuple(index[a] for a in best)
