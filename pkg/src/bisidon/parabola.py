"""Random parabolas in F_p^2 and the containment probabilities for 3 and 4 points."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from bisidon import kernels
from bisidon.exactnum import (
    AffineMap,
    FpPoint,
    affine_invert,
    collinear,
    is_prime,
    iter_affine_maps,
    sample_uniform_affine,
    sample_uniform_affine_batch,
)
from bisidon.streams import draw_seed, substream

MC_CHUNK = 1 << 16
EXHAUSTIVE_MAX_P = 7


@dataclass(frozen=True)
class Parabola:
    """The image g(P0) of the standard parabola P0 = {(t, t^2)} under g."""

    p: int
    generator: AffineMap
    points: frozenset[FpPoint] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        g = self.generator
        pts = frozenset(FpPoint(*g.apply_xy(t, t * t % self.p), self.p) for t in range(self.p))
        object.__setattr__(self, "points", pts)

    def __contains__(self, v: FpPoint) -> bool:
        return v in self.points

    def contains_xy(self, xy: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (n, 2) array of residues."""
        xy = np.asarray(xy, dtype=np.int64).reshape(-1, 2)
        p = self.p
        a, b, c, d, tx, ty = self.generator.entries
        det = self.generator.det
        dx = (xy[:, 0] - tx) % p
        dy = (xy[:, 1] - ty) % p
        X = (d * dx - b * dy) % p
        Y = (a * dy - c * dx) % p
        return (Y * det - X * X) % p == 0

    @property
    def point_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(v.xy for v in self.points)


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def standard_parabola(p: int) -> Parabola:
    _require_prime(p)
    return Parabola(p, AffineMap.identity(p))


def random_parabola(p: int, rng: np.random.Generator) -> Parabola:
    """Uniform over the p^2 (p^2 - 1) parabolas (uniform affine image of P0)."""
    _require_prime(p)
    if p == 2:
        raise ValueError("p = 2 is degenerate: every 2-point subset of F_2^2 is Sidon")
    return Parabola(p, sample_uniform_affine(p, rng))


def parabolas_through_unit_triple(p: int) -> list[Parabola]:
    """P_s = {(x+sy)^2 = x + s^2 y} for s in F_p minus {0, 1}.

    In coordinates u = x + s y, w = x + s^2 y the curve is w = u^2, so
    P_s is the preimage of P0 under that linear change of variables.
    """
    _require_prime(p)
    if p < 3:
        raise ValueError("p must be at least 3")
    out = []
    for s in range(2, p):
        to_standard = AffineMap.from_entries(1, s, 1, s * s, 0, 0, p)
        out.append(Parabola(p, affine_invert(to_standard)))
    return out


def parabola_count(p: int) -> int:
    return p * p * (p * p - 1)


def triple_containment_probability_exact(p: int) -> Fraction:
    """Pr[v1, v2, v3 in P] for a noncollinear triple: (p-2) / (p^2 (p+1)(p-1))."""
    if p < 3:
        raise ValueError("p must be at least 3")
    return Fraction(p - 2, p * p * (p + 1) * (p - 1))


def enumerate_parabolas(p: int) -> Counter:
    """Map each distinct parabola (as a point set) to the number of affine maps producing it."""
    _require_prime(p)
    if p > EXHAUSTIVE_MAX_P:
        raise ValueError(f"exhaustive enumeration is capped at p <= {EXHAUSTIVE_MAX_P}")
    base = [(t, t * t % p) for t in range(p)]
    out: Counter = Counter()
    for g in iter_affine_maps(p):
        out[frozenset(g.apply_xy(x, y) for x, y in base)] += 1
    return out


def is_plane_sidon(points: Iterable[FpPoint]) -> bool:
    """All unordered pair sums (including doubles) are distinct points."""
    pts = sorted(points)
    seen = set()
    for i, u in enumerate(pts):
        for v in pts[i:]:
            s = ((u.x + v.x) % u.p, (u.y + v.y) % u.p)
            if s in seen:
                return False
            seen.add(s)
    return True


def has_three_collinear(points: Iterable[FpPoint]) -> bool:
    return any(collinear(u, v, w) for u, v, w in combinations(sorted(points), 3))


def _chunk_hits(args) -> int:
    base, index, n, p, pts, backend = args
    mats, trans = sample_uniform_affine_batch(p, n, substream(base, index))
    return kernels.parabola_hits(mats, trans, pts, p, backend)


def estimate_containment_probability(
    points: Sequence[FpPoint],
    trials: int,
    rng: np.random.Generator | int,
    workers: int = 1,
    backend: str | None = None,
) -> tuple[Fraction, Fraction]:
    """Monte-Carlo estimate of Pr[points subset of P] with its binomial standard error.

    Trials are split into chunks of ``MC_CHUNK``; chunk i draws from
    ``substream(base, i)``, where ``base`` is the integer seed itself or a
    word drawn from a Generator. Hit counts are summed, so the result does not
    depend on ``workers``.
    """
    pts = list(points)
    if len(pts) < 1:
        raise ValueError("need at least one point")
    p = pts[0].p
    if any(v.p != p for v in pts):
        raise ValueError("points must share a modulus")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    if trials < 1:
        raise ValueError("trials must be positive")
    base = draw_seed(rng) if isinstance(rng, np.random.Generator) else int(rng)
    xy = np.array([v.xy for v in pts], dtype=np.int64)
    jobs = []
    for index, start in enumerate(range(0, trials, MC_CHUNK)):
        jobs.append((base, index, min(MC_CHUNK, trials - start), p, xy, backend))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(_chunk_hits, jobs))
    else:
        hits = sum(map(_chunk_hits, jobs))
    est = Fraction(hits, trials)
    stderr = Fraction(math.sqrt(float(est * (1 - est)) / trials))
    return est, stderr
