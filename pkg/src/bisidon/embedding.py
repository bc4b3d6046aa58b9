"""Freiman embeddings.

Two constructions:

* :func:`multiplicative_to_additive_embedding` sends positive rationals to
  integers through their exponent vectors, weighting the coordinate of the
  i-th prime by R**i. With R = 2M + 1, where M bounds every entry of every
  pairwise exponent-vector sum, signed-digit decoding is unique, so
  ``a*b == c*d`` holds exactly when ``f(a) + f(b) == f(c) + f(d)``.
* :func:`sample_modular_embedding` sends integers to F_p^d through
  a -> ([p*theta_i*a] mod p)_i for random theta_i = k_i / 2**63, keeping the
  elements whose fractional parts {p*theta_i*a} all lie in [0, 1/2) and whose
  image is not shared with any other element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from bisidon import kernels
from bisidon.exactnum import as_rational, factorize
from bisidon.streams import draw_seed, substream

THETA_BITS = 63
THETA_DENOMINATOR = 1 << THETA_BITS


class EmbeddingPreconditionError(ValueError):
    """|A| exceeds 2**(-2d-1) * p**d; the caller should enlarge p."""


@dataclass(frozen=True)
class RadixEmbedding:
    prime_order: tuple[int, ...]
    radix: int
    image_table: dict[Fraction, int] = field(hash=False)

    def __call__(self, a) -> int:
        return self.image_table[as_rational(a)]

    def preimage(self) -> dict[int, Fraction]:
        return {v: k for k, v in self.image_table.items()}


def multiplicative_to_additive_embedding(A: Iterable) -> RadixEmbedding:
    """Freiman embedding of (A, *) into (Z, +), two-sided on quadruples."""
    vals = sorted({as_rational(a) for a in A})
    if any(v <= 0 for v in vals):
        raise ValueError("multiplicative embedding needs positive rationals")
    vectors = {v: factorize(v) for v in vals}
    primes = sorted({q for vec in vectors.values() for q in vec})
    # pairwise sums reach 2*max and 2*min per coordinate
    bound = 0
    for q in primes:
        exps = [vec.get(q, 0) for vec in vectors.values()]
        bound = max(bound, 2 * max(exps), -2 * min(exps))
    radix = 2 * bound + 1
    weight = {q: radix**i for i, q in enumerate(primes)}
    table = {v: sum(e * weight[q] for q, e in vec.items()) for v, vec in vectors.items()}
    return RadixEmbedding(tuple(primes), radix, table)


@dataclass(frozen=True)
class ModularEmbedding:
    p: int
    d: int
    theta_numerators: tuple[int, ...]
    retained: tuple[int, ...]
    image_table: dict[int, tuple[int, ...]] = field(hash=False)

    @property
    def thetas(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(k, THETA_DENOMINATOR) for k in self.theta_numerators)

    def __call__(self, a: int) -> tuple[int, ...]:
        return self.image_table[a]


@dataclass(frozen=True)
class EmbeddingResult:
    embedding: ModularEmbedding
    retained_fraction: Fraction
    source_size: int


def phi(x: Fraction, p: int) -> int:
    """[p x] mod p."""
    return (x * p).__floor__() % p


def _sorted_ints(A: Iterable[int]) -> list[int]:
    return sorted({int(a) for a in A})


def modular_capacity_ok(n: int, p: int, d: int) -> bool:
    return n * 2 ** (2 * d + 1) <= p**d


def embed_with_thetas(A: Iterable[int], p: int, theta_numerators: Iterable[int]) -> EmbeddingResult:
    """Deterministic part of the modular construction for given theta numerators."""
    ints = _sorted_ints(A)
    thetas = [int(k) for k in theta_numerators]
    coords, eligible = kernels.modular_images(ints, p, thetas)
    if len(ints):
        # an element is in the collision set if its image is shared with any other element
        keep = eligible & (_image_multiplicity(coords, p) == 1)
    else:
        keep = eligible
    idx = np.flatnonzero(keep).tolist()
    rows = coords[keep].tolist()
    table = {ints[i]: tuple(row) for i, row in zip(idx, rows)}
    emb = ModularEmbedding(p, len(thetas), tuple(thetas), tuple(table), table)
    frac = Fraction(len(table), len(ints)) if len(ints) else Fraction(0)
    return EmbeddingResult(emb, frac, len(ints))


def _image_multiplicity(coords: np.ndarray, p: int) -> np.ndarray:
    """For each row, how many rows share its image."""
    d = coords.shape[1]
    if p**d <= 1 << 24:
        code = coords @ np.array([p**k for k in range(d)], dtype=np.int64)
        return np.bincount(code, minlength=p**d)[code]
    _, inverse, counts = np.unique(coords, axis=0, return_inverse=True, return_counts=True)
    return counts[inverse.reshape(-1)]


def sample_modular_embedding(A: Iterable[int], p: int, d: int, rng: np.random.Generator) -> EmbeddingResult:
    """Random Freiman embedding of a subset of the integer set A into F_p^d."""
    ints = _sorted_ints(A)
    if d < 1:
        raise ValueError("d must be positive")
    if not modular_capacity_ok(len(ints), p, d):
        raise EmbeddingPreconditionError(
            f"|A| = {len(ints)} exceeds 2^-{2 * d + 1} * {p}^{d}; use a larger prime"
        )
    thetas = rng.integers(0, THETA_DENOMINATOR, size=d, dtype=np.uint64).tolist()
    return embed_with_thetas(ints, p, thetas)


def verify_freiman_homomorphism(emb: ModularEmbedding) -> bool:
    """Injective on the retained set, and equal pair sums give equal image sums."""
    images = [emb.image_table[a] for a in emb.retained]
    if len(set(images)) != len(images):
        return False
    if len(images) <= 1:
        return True
    return kernels.freiman_consistent(list(emb.retained), images, emb.p)


def best_of_k_embeddings(
    A: Iterable[int], p: int, d: int, k: int, rng: np.random.Generator
) -> EmbeddingResult:
    """Largest retained set over k samples drawn from independent substreams.

    Substream i is ``substream(base, i)`` with ``base`` drawn once from rng;
    ties go to the lowest index.
    """
    if k < 1:
        raise ValueError("k must be positive")
    ints = _sorted_ints(A)
    base = draw_seed(rng)
    best = None
    for i in range(k):
        res = sample_modular_embedding(ints, p, d, substream(base, i))
        if best is None or len(res.embedding.retained) > len(best.embedding.retained):
            best = res
    return best
