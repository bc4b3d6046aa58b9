"""Randomized extraction of bi-Sidon subsets.

Pipeline for one trial:

1. keep the larger of A∩Q_{>0} and (-A)∩Q_{>0};
2. branch on which energy is smaller;
3. move to integer coordinates (dilation for the additive branch, the radix
   exponent-vector embedding for the multiplicative one);
4. pull a uniformly random parabola of F_p^2 back through a random modular
   Freiman embedding, giving a Sidon set B;
5. keep each element of B independently with probability q;
6. greedily delete elements until no nontrivial quadruple of the other
   operation survives;
7. negate back if needed and verify.
"""

from __future__ import annotations

import math
import time
from collections import Counter, OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable

import numpy as np

from bisidon.embedding import (
    EmbeddingPreconditionError,
    EmbeddingResult,
    best_of_k_embeddings,
    modular_capacity_ok,
    multiplicative_to_additive_embedding,
    verify_freiman_homomorphism,
)
from bisidon.energy import (
    Operation,
    QuadrupleKind,
    additive_energy,
    as_set,
    is_additive_sidon,
    is_bi_sidon,
    multiplicative_energy,
    nontrivial_quadruples,
)
from bisidon.exactnum import as_rational, is_prime, next_prime_at_least, scaled_integers
from bisidon.parabola import Parabola, random_parabola
from bisidon.streams import derive_seed, substream

ADAPTIVE_STEPS = 13  # c * 2**j for j = 0..12


class ExtractionError(RuntimeError):
    """An internal invariant failed; this indicates a bug, never bad input."""


class Branch(str, Enum):
    AUTO = "auto"
    ADDITIVE_FIRST = "additive_first"
    MULTIPLICATIVE_FIRST = "multiplicative_first"
    TRIVIAL = "trivial"


@dataclass(frozen=True)
class ExtractorConfig:
    delta: Fraction = Fraction(7, 26)
    c: Fraction = Fraction(1, 1024)
    q_override: Fraction | None = None
    p_override: int | None = None
    d: int = 2
    trials: int = 32
    embedding_retries: int = 16
    branch: Branch = Branch.AUTO
    adaptive_c: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "delta", as_rational(self.delta))
        object.__setattr__(self, "c", as_rational(self.c))
        object.__setattr__(self, "branch", Branch(self.branch))
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.q_override is not None:
            q = as_rational(self.q_override)
            if not 0 < q <= 1:
                raise ValueError("q must lie in (0, 1]")
            object.__setattr__(self, "q_override", q)
        if self.p_override is not None and not is_prime(self.p_override):
            raise ValueError(f"p = {self.p_override} is not prime")
        if self.p_override is not None and self.p_override < 3:
            raise ValueError("p must be at least 3")
        if self.d != 2:
            raise ValueError("the parabola lives in F_p^2, so the embedding dimension d must be 2")
        if self.trials < 1 or self.embedding_retries < 1:
            raise ValueError("trials and embedding_retries must be positive")
        if self.branch is Branch.TRIVIAL:
            raise ValueError("branch must be auto, additive_first or multiplicative_first")

    @property
    def q_exponent(self) -> Fraction:
        return self.delta / 3 - Fraction(1, 6)

    @property
    def size_exponent(self) -> Fraction:
        return Fraction(1, 3) + self.delta / 3

    def sparsity(self, n: int, c: Fraction | None = None) -> Fraction:
        """q = min(1, c * n**(delta/3 - 1/6)), as an exact binary rational."""
        c = self.c if c is None else c
        return min(Fraction(1), Fraction(float(c) * n ** float(self.q_exponent)))


def check_default_constants() -> None:
    """Sanity of the default exponents: q ~ N^(-1/13) and |S| ~ N^(33/78)."""
    cfg = ExtractorConfig()
    if cfg.q_exponent != Fraction(-1, 13) or cfg.size_exponent != Fraction(33, 78):
        raise ExtractionError("default delta does not give the expected exponents")


@dataclass
class ExtractionTrace:
    branch: Branch
    additive_energy: int
    multiplicative_energy: int
    p: int
    size_A: int
    size_A2: int
    size_B: int
    size_Btilde: int
    size_S: int
    quadruples_E0: int
    quadruples_E1: int
    removals: int
    q: Fraction
    seed: int
    negated: bool
    wall_ms: float = 0.0


@dataclass
class BiSidonResult:
    subset: tuple[Fraction, ...]
    trace: ExtractionTrace
    verified: bool = field(default=False)


# ---------------------------------------------------------------- stages


def preprocess(A: Iterable) -> tuple[list[Fraction], bool]:
    """Drop 0 and keep the larger of A ∩ Q>0 and (-A) ∩ Q>0 (ties: unnegated)."""
    vals = as_set(A)
    pos = [v for v in vals if v > 0]
    neg = sorted(-v for v in vals if v < 0)
    if len(neg) > len(pos):
        return neg, True
    return pos, False


def choose_branch(A: Iterable, energies: tuple[int, int] | None = None) -> Branch:
    """Additive-first iff E×(A) <= E+(A)."""
    vals = as_set(A)
    if not vals:
        raise ValueError("choose_branch needs a nonempty set")
    e_add, e_mul = energies if energies is not None else (additive_energy(vals), multiplicative_energy(vals))
    return Branch.ADDITIVE_FIRST if e_mul <= e_add else Branch.MULTIPLICATIVE_FIRST


def select_prime(n: int) -> int:
    """Smallest prime >= ceil(8 sqrt(n)); lies in [8 sqrt(n), 16 sqrt(n)]."""
    if n < 1:
        raise ValueError("n must be positive")
    p = next_prime_at_least(math.isqrt(64 * n - 1) + 1)
    if p * p > 256 * n:
        raise ExtractionError(f"prime {p} escaped the window for n = {n}")
    return p


@dataclass(frozen=True)
class Pullback:
    subset: tuple[int, ...]
    embedding: EmbeddingResult
    parabola: Parabola | None


def build_sidon_pullback(A: Iterable[int], p: int, cfg: ExtractorConfig, rng: np.random.Generator) -> Pullback:
    """B = f^-1(P) for a random Freiman embedding f and a random parabola P."""
    ints = sorted({int(a) for a in A})
    if not modular_capacity_ok(len(ints), p, cfg.d):
        raise EmbeddingPreconditionError(f"|A| = {len(ints)} too large for p = {p}")
    emb = best_of_k_embeddings(ints, p, cfg.d, cfg.embedding_retries, rng)
    if not ints:
        return Pullback((), emb, None)
    if not verify_freiman_homomorphism(emb.embedding):
        raise ExtractionError("modular embedding failed Freiman verification")
    parabola = random_parabola(p, rng)
    retained = emb.embedding.retained
    if retained:
        xy = np.array([emb.embedding.image_table[a] for a in retained], dtype=np.int64)
        mask = parabola.contains_xy(xy)
        subset = tuple(a for a, hit in zip(retained, mask.tolist()) if hit)
    else:
        subset = ()
    if not is_additive_sidon(subset):
        raise ExtractionError("pullback of a parabola is not additive Sidon")
    return Pullback(subset, emb, parabola)


_TWO64 = 1 << 64


def sparsify(B: Iterable, q: Fraction, rng: np.random.Generator) -> list:
    """Keep each element independently with probability q (one 64-bit draw each)."""
    q = as_rational(q)
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    items = sorted(B)
    if not items:
        return []
    draws = rng.integers(0, _TWO64, size=len(items), dtype=np.uint64).tolist()
    num, den = q.numerator, q.denominator
    return [b for b, u in zip(items, draws) if u * den < num * _TWO64]


@dataclass(frozen=True)
class Deletion:
    survivors: tuple[Fraction, ...]
    removed: tuple[Fraction, ...]
    kinds: Counter


def greedy_deletion(B: Iterable, operation) -> Deletion:
    """Remove the element in the most remaining quadruples (ties: largest) until none remain."""
    survivors = set(as_set(B))
    quads = nontrivial_quadruples(survivors, operation)
    kinds = Counter(q.kind for q in quads)
    members = [frozenset(q.elements) for q in quads]
    removed = []
    while members:
        load = Counter(x for m in members for x in m)
        victim = max(load, key=lambda x: (load[x], x))
        removed.append(victim)
        survivors.discard(victim)
        members = [m for m in members if victim not in m]
    return Deletion(tuple(sorted(survivors)), tuple(removed), kinds)


def delete_quadruple_elements(B: Iterable, operation) -> list[Fraction]:
    return list(greedy_deletion(B, operation).survivors)


# ---------------------------------------------------------------- pipeline


_ENERGY_CACHE: OrderedDict = OrderedDict()


def _energies(vals: list[Fraction]) -> tuple[int, int]:
    key = tuple(vals)
    if key in _ENERGY_CACHE:
        _ENERGY_CACHE.move_to_end(key)
        return _ENERGY_CACHE[key]
    out = (additive_energy(vals), multiplicative_energy(vals))
    _ENERGY_CACHE[key] = out
    while len(_ENERGY_CACHE) > 8:
        _ENERGY_CACHE.popitem(last=False)
    return out


def _pilot_qs(cfg: ExtractorConfig, n: int) -> list[Fraction]:
    if cfg.q_override is not None:
        return [cfg.q_override]
    if not cfg.adaptive_c:
        return [cfg.sparsity(n)]
    qs = []
    for j in range(ADAPTIVE_STEPS):
        q = cfg.sparsity(n, cfg.c * 2**j)
        qs.append(q)
        if q == 1:
            break
    return qs


@dataclass(frozen=True)
class _Prepared:
    """Per-input work shared by all trials."""

    original: frozenset
    vals: tuple[Fraction, ...]
    negated: bool
    energies: tuple[int, int] | None
    branch: Branch
    ints: tuple[int, ...]
    to_value: dict


def _prepare(A: Iterable, cfg: ExtractorConfig, energies: tuple[int, int] | None = None) -> _Prepared:
    original = as_set(A)
    vals, negated = preprocess(original)
    if len(vals) <= 2:
        e = energies if energies is not None else (_energies(vals) if vals else None)
        return _Prepared(frozenset(original), tuple(vals), negated, e, Branch.TRIVIAL, (), {})
    e = energies if energies is not None else _energies(vals)
    branch = cfg.branch if cfg.branch is not Branch.AUTO else choose_branch(vals, e)
    if branch is Branch.ADDITIVE_FIRST:
        ints, _ = scaled_integers(vals)
        to_value = dict(zip(ints, vals))
    else:
        to_value = multiplicative_to_additive_embedding(vals).preimage()
        ints = sorted(to_value)
    return _Prepared(frozenset(original), tuple(vals), negated, e, branch, tuple(ints), to_value)


def _finish(subset, prep: _Prepared, trace: ExtractionTrace, t0: float) -> BiSidonResult:
    final = sorted(-x for x in subset) if prep.negated else sorted(subset)
    if not prep.original.issuperset(final):
        raise ExtractionError("extracted set is not a subset of the input")
    if not is_bi_sidon(final):
        raise ExtractionError("extracted set is not bi-Sidon")
    trace.wall_ms = (time.perf_counter() - t0) * 1000.0
    return BiSidonResult(tuple(final), trace, verified=True)


def extract_once(
    A: Iterable,
    cfg: ExtractorConfig,
    rng: np.random.Generator,
    energies: tuple[int, int] | None = None,
    seed: int = 0,
) -> BiSidonResult:
    """One randomized trial of the pipeline; the result is verified bi-Sidon."""
    return _extract_prepared(_prepare(A, cfg, energies), cfg, rng, seed)


def _extract_prepared(prep: _Prepared, cfg: ExtractorConfig, rng: np.random.Generator, seed: int) -> BiSidonResult:
    t0 = time.perf_counter()
    n = len(prep.vals)
    if prep.branch is Branch.TRIVIAL:
        e_add, e_mul = prep.energies or (0, 0)
        trace = ExtractionTrace(Branch.TRIVIAL, e_add, e_mul, 0, n, n, n, n, n, 0, 0, 0, Fraction(1), seed, prep.negated)
        return _finish(prep.vals, prep, trace, t0)

    delete_op = Operation.PRODUCT if prep.branch is Branch.ADDITIVE_FIRST else Operation.SUM
    p = cfg.p_override if cfg.p_override is not None else select_prime(n)
    pull = build_sidon_pullback(prep.ints, p, cfg, rng)
    B = sorted(prep.to_value[a] for a in pull.subset)

    best = None
    for q in _pilot_qs(cfg, n):
        tilde = sparsify(B, q, rng)
        dele = greedy_deletion(tilde, delete_op)
        if best is None or len(dele.survivors) > len(best[2].survivors):
            best = (q, tilde, dele)
    q, tilde, dele = best

    trace = ExtractionTrace(
        branch=prep.branch,
        additive_energy=prep.energies[0],
        multiplicative_energy=prep.energies[1],
        p=p,
        size_A=n,
        size_A2=len(pull.embedding.embedding.retained),
        size_B=len(B),
        size_Btilde=len(tilde),
        size_S=len(dele.survivors),
        quadruples_E0=dele.kinds.get(QuadrupleKind.E0, 0),
        quadruples_E1=dele.kinds.get(QuadrupleKind.E1, 0),
        removals=len(dele.removed),
        q=q,
        seed=seed,
        negated=prep.negated,
    )
    return _finish(dele.survivors, prep, trace, t0)


def _run_trial(args) -> BiSidonResult:
    prep, cfg, index = args
    return _extract_prepared(prep, cfg, substream(cfg.seed, index), derive_seed(cfg.seed, index))


def extract(A: Iterable, cfg: ExtractorConfig | None = None, workers: int = 1) -> BiSidonResult:
    """Best of ``cfg.trials`` independent trials (largest, then lexicographically smallest).

    Trial i draws from ``substream(cfg.seed, i)``; the answer is the same for
    any ``workers``.
    """
    cfg = cfg or ExtractorConfig()
    prep = _prepare(A, cfg)
    jobs = [(prep, cfg, i) for i in range(cfg.trials)]
    if workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs))
    else:
        results = [_run_trial(job) for job in jobs]
    return min(results, key=lambda r: (-len(r.subset), r.subset))
