"""Input generators and the one-value-per-line set file format."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from bisidon.exactnum import as_rational, format_rational

KINDS = ("interval", "geometric", "random", "pds", "file")
PDS_ORDERS = (2, 3, 4, 5, 7, 8, 9, 11)  # prime powers up to 11


class InputFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    kind: str
    elements: tuple[Fraction, ...]
    params: dict = field(default_factory=dict, hash=False)
    seed: int | None = None


def interval(n: int) -> list[Fraction]:
    if n < 1:
        raise ValueError("N must be at least 1")
    return [Fraction(i) for i in range(1, n + 1)]


def geometric(gamma, n: int) -> list[Fraction]:
    g = as_rational(gamma)
    if g in (-1, 0, 1):
        raise ValueError("gamma must avoid -1, 0 and 1")
    if n < 1:
        raise ValueError("N must be at least 1")
    out, x = [], Fraction(1)
    for _ in range(n):
        x *= g
        out.append(x)
    return out


def random_integers(n: int, max_value: int, rng: np.random.Generator) -> list[Fraction]:
    """N distinct integers drawn uniformly from [1, max_value]."""
    if n < 1:
        raise ValueError("N must be at least 1")
    if n > max_value:
        raise ValueError(f"cannot draw {n} distinct values from [1, {max_value}]")
    picks = rng.choice(max_value, size=n, replace=False) + 1
    return [Fraction(int(v)) for v in sorted(picks.tolist())]


def perfect_difference_set(q: int) -> list[int]:
    """q + 1 residues in [1, q^2 + q + 1] with all differences distinct mod q^2 + q + 1.

    Backtracking search; returns the lexicographically first such set, which
    starts 1, 2 since some pair must differ by 1 and translates preserve the
    property.
    """
    if q not in PDS_ORDERS:
        raise ValueError(f"pds order must be one of {PDS_ORDERS}")
    m = q * q + q + 1
    k = q + 1
    full = (1 << m) - 1
    chosen = [1, 2]

    def rot(mask: int, s: int) -> int:
        s %= m
        return ((mask << s) | (mask >> (m - s))) & full

    def diff_mask(x: int) -> int:
        mask = 0
        for y in chosen:
            d = (x - y) % m
            mask |= (1 << d) | (1 << (m - d))
        return mask

    def extend(start: int, used: int) -> bool:
        if len(chosen) == k:
            return True
        # x is blocked when x - y is an already used difference for some chosen y
        blocked = 0
        for y in chosen:
            blocked |= rot(used, y) | (1 << (y % m))
        free = [x for x in range(start, m + 1) if not blocked >> (x % m) & 1]
        need = 2 * len(chosen)
        for i, x in enumerate(free):
            if len(free) - i < k - len(chosen):
                break
            mask = diff_mask(x)
            if mask & used or mask.bit_count() != need:
                continue
            chosen.append(x)
            if extend(x + 1, used | mask):
                return True
            chosen.pop()
        return False

    used = (1 << 1) | (1 << (m - 1))
    if not extend(3, used):
        raise RuntimeError(f"no perfect difference set of order {q} found")
    return list(chosen)


def gen_dataset(kind: str, params: dict, rng: np.random.Generator | None = None) -> Dataset:
    """Build a dataset of one of the supported kinds.

    params: ``n`` (interval, geometric, random), ``gamma`` (geometric,
    default 2), ``max`` (random, default n**2), ``p`` (pds), ``path`` (file).
    """
    if kind == "interval":
        elems = interval(int(params["n"]))
    elif kind == "geometric":
        elems = geometric(params.get("gamma", 2), int(params["n"]))
    elif kind == "random":
        if rng is None:
            raise ValueError("random datasets need an rng")
        n = int(params["n"])
        elems = random_integers(n, int(params.get("max") or max(n * n, 1)), rng)
    elif kind == "pds":
        elems = [Fraction(x) for x in perfect_difference_set(int(params["p"]))]
    elif kind == "file":
        elems = read_set_file(params["path"])
    else:
        raise ValueError(f"unknown dataset kind {kind!r}")
    return Dataset(kind, tuple(elems), dict(params))


def parse_set_lines(lines: Iterable[str]) -> list[Fraction]:
    out: list[Fraction] = []
    seen: set[Fraction] = set()
    for lineno, raw in enumerate(lines, 1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            value = as_rational(text)
        except ValueError as exc:
            raise InputFormatError(f"line {lineno}: {exc}") from None
        if value in seen:
            raise InputFormatError(f"line {lineno}: duplicate element {text}")
        seen.add(value)
        out.append(value)
    return out


def read_set_file(path) -> list[Fraction]:
    with open(path, encoding="utf-8") as fh:
        return parse_set_lines(fh)


def format_set(values: Iterable[Fraction], header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines.extend(format_rational(as_rational(v)) for v in values)
    return "\n".join(lines) + "\n"


def write_set_file(path, values: Iterable[Fraction], header: str | None = None) -> None:
    Path(path).write_text(format_set(values, header), encoding="utf-8")
