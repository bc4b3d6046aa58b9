"""Exact arithmetic: rationals, primes, factorization, and the affine group of F_p^2.

Rationals are :class:`fractions.Fraction` (always in lowest terms with a
positive denominator). Nothing in this module touches floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as _cartesian
from typing import Iterable, Iterator

import numpy as np

RationalNumber = Fraction
ExponentVector = dict  # prime -> nonzero exponent

# Miller-Rabin with the first 13 prime bases is deterministic below this bound.
MR_DETERMINISTIC_BOUND = 3317044064679887385961981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
TRIAL_DIVISION_LIMIT = 10**6


class FactorizationError(ValueError):
    """Raised when an integer cannot be factored with certified primality."""


# ---------------------------------------------------------------- rationals


def as_rational(value) -> Fraction:
    """Convert an int, Fraction, or ``"a/b"`` string to a Fraction.

    Floats are refused: they are not exact inputs.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                n, d = int(num.strip()), int(den.strip())
            except ValueError:
                raise ValueError(f"not a rational literal: {value!r}") from None
            if d == 0:
                raise ValueError(f"zero denominator: {value!r}")
            return Fraction(n, d)
        try:
            return Fraction(int(text))
        except ValueError:
            raise ValueError(
                f"not a rational literal: {value!r} (only integers and a/b are "
                "accepted; irrational and decimal inputs are not supported)"
            ) from None
    raise TypeError(f"cannot interpret {type(value).__name__} as an exact rational")


def format_rational(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = math.lcm(den, v.denominator)
    return den


def scaled_integers(values: Iterable[Fraction]) -> tuple[list[int], int]:
    """Multiply every value by the lcm of the denominators.

    Returns the integer images (same order) and the scale factor. Dilation
    preserves both additive and multiplicative quadruple relations.
    """
    vals = [as_rational(v) for v in values]
    scale = common_denominator(vals)
    return [v.numerator * (scale // v.denominator) for v in vals], scale


_HASH_SAFE = 1 << 60
_SPREAD_PRIME = (1 << 64) - 59


def hash_key(x):
    """An exact dict/set key for x that hashes well even for huge values.

    Python hashes ints and Fractions modulo 2**61 - 1, so structured values
    such as 2**a + 2**b pile into a handful of buckets. Large values are
    paired with their residue modulo a different prime; small ones pass
    through unchanged.
    """
    if isinstance(x, int):
        return x if -_HASH_SAFE < x < _HASH_SAFE else (x % _SPREAD_PRIME, x)
    n, d = x.numerator, x.denominator
    if -_HASH_SAFE < n < _HASH_SAFE and d < _HASH_SAFE:
        return x
    return (n % _SPREAD_PRIME, d % _SPREAD_PRIME, x)


# ---------------------------------------------------------------- primes


def is_prime(n: int) -> bool:
    """Deterministic primality for n below ``MR_DETERMINISTIC_BOUND``."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= MR_DETERMINISTIC_BOUND:
        raise ValueError(f"{n} exceeds the deterministic primality range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=1 << 16)
def next_prime_at_least(n: int) -> int:
    """Smallest prime p >= n."""
    if n < 1:
        raise ValueError("n must be positive")
    if n <= 2:
        return 2
    p = n | 1
    while not is_prime(p):
        p += 2
    return p


@lru_cache(maxsize=1)
def _small_primes() -> tuple[int, ...]:
    limit = TRIAL_DIVISION_LIMIT
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return tuple(int(q) for q in np.flatnonzero(sieve))


def _pollard_brent(n: int, max_iter: int = 1 << 20) -> int:
    """A nontrivial factor of the odd composite n (Brent's cycle variant)."""
    for c in range(1, 40):
        y, r, q, g = 2, 1, 1, 1
        m = 128
        x = ys = y
        steps = 0
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
            steps += r
            if steps > max_iter:
                break
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
    raise FactorizationError(f"Pollard rho failed to split {n}")


def factor_integer(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer."""
    if n < 1:
        raise ValueError("factor_integer expects a positive integer")
    out: dict[int, int] = {}
    for q in _small_primes():
        if q * q > n:
            break
        if n % q == 0:
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            out[q] = e
    if n == 1:
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if m >= MR_DETERMINISTIC_BOUND:
            raise FactorizationError(
                f"cofactor {m} is beyond the certified primality range; "
                "input resists factorization at desk scale"
            )
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_brent(m)
        stack.extend((d, m // d))
    return dict(sorted(out.items()))


def factorize(r) -> ExponentVector:
    """Exponent vector of a positive rational; denominators get negative exponents."""
    r = as_rational(r)
    if r <= 0:
        raise ValueError(f"factorize needs a positive rational, got {format_rational(r)}")
    vec = dict(factor_integer(r.numerator))
    for q, e in factor_integer(r.denominator).items():
        vec[q] = vec.get(q, 0) - e
    return {q: e for q, e in sorted(vec.items()) if e}


def evaluate_exponents(vec: ExponentVector) -> Fraction:
    out = Fraction(1)
    for q, e in vec.items():
        out *= Fraction(q) ** e
    return out


# ---------------------------------------------------------------- F_p^2 geometry


@dataclass(frozen=True, order=True)
class FpPoint:
    x: int
    y: int
    p: int

    def __post_init__(self):
        if not (0 <= self.x < self.p and 0 <= self.y < self.p):
            raise ValueError(f"coordinates ({self.x}, {self.y}) not reduced mod {self.p}")

    @classmethod
    def of(cls, x: int, y: int, p: int) -> "FpPoint":
        return cls(x % p, y % p, p)

    def __add__(self, other: "FpPoint") -> "FpPoint":
        _same_modulus(self.p, other.p)
        return FpPoint.of(self.x + other.x, self.y + other.y, self.p)

    def __sub__(self, other: "FpPoint") -> "FpPoint":
        _same_modulus(self.p, other.p)
        return FpPoint.of(self.x - other.x, self.y - other.y, self.p)

    @property
    def xy(self) -> tuple[int, int]:
        return (self.x, self.y)


def _same_modulus(p: int, q: int) -> None:
    if p != q:
        raise ValueError(f"modulus mismatch: {p} vs {q}")


def collinear(u: FpPoint, v: FpPoint, w: FpPoint) -> bool:
    _same_modulus(u.p, v.p)
    _same_modulus(u.p, w.p)
    p = u.p
    return ((v.x - u.x) * (w.y - u.y) - (v.y - u.y) * (w.x - u.x)) % p == 0


@dataclass(frozen=True)
class AffineMap:
    """v -> M v + t over F_p, with M = ((a, b), (c, d)) invertible."""

    matrix: tuple[tuple[int, int], tuple[int, int]]
    translation: FpPoint
    p: int

    def __post_init__(self):
        p = self.p
        (a, b), (c, d) = self.matrix
        if any(not 0 <= e < p for e in (a, b, c, d)):
            raise ValueError("matrix entries must be reduced mod p")
        _same_modulus(p, self.translation.p)
        if (a * d - b * c) % p == 0:
            raise ValueError("affine map matrix is singular mod p")

    @classmethod
    def from_entries(cls, a: int, b: int, c: int, d: int, tx: int, ty: int, p: int) -> "AffineMap":
        return cls(((a % p, b % p), (c % p, d % p)), FpPoint.of(tx, ty, p), p)

    @classmethod
    def identity(cls, p: int) -> "AffineMap":
        return cls.from_entries(1, 0, 0, 1, 0, 0, p)

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.matrix
        return (a * d - b * c) % self.p

    @property
    def entries(self) -> tuple[int, int, int, int, int, int]:
        (a, b), (c, d) = self.matrix
        return (a, b, c, d, self.translation.x, self.translation.y)

    def __call__(self, v: FpPoint) -> FpPoint:
        return affine_apply(self, v)

    def apply_xy(self, x: int, y: int) -> tuple[int, int]:
        (a, b), (c, d) = self.matrix
        p = self.p
        return ((a * x + b * y + self.translation.x) % p, (c * x + d * y + self.translation.y) % p)


def affine_apply(g: AffineMap, v: FpPoint) -> FpPoint:
    _same_modulus(g.p, v.p)
    x, y = g.apply_xy(v.x, v.y)
    return FpPoint(x, y, g.p)


def affine_invert(g: AffineMap) -> AffineMap:
    p = g.p
    (a, b), (c, d) = g.matrix
    inv = pow(g.det, -1, p)
    ia, ib, ic, id_ = d * inv % p, -b * inv % p, -c * inv % p, a * inv % p
    tx, ty = g.translation.x, g.translation.y
    return AffineMap.from_entries(ia, ib, ic, id_, -(ia * tx + ib * ty), -(ic * tx + id_ * ty), p)


def affine_compose(g: AffineMap, h: AffineMap) -> AffineMap:
    """The map g o h (apply h first)."""
    _same_modulus(g.p, h.p)
    p = g.p
    (a, b), (c, d) = g.matrix
    (e, f), (k, l) = h.matrix
    tx, ty = g.apply_xy(h.translation.x, h.translation.y)
    return AffineMap.from_entries(a * e + b * k, a * f + b * l, c * e + d * k, c * f + d * l, tx, ty, p)


def affine_group_order(p: int) -> int:
    return p * p * (p * p - 1) * (p * p - p)


def sample_uniform_affine(p: int, rng: np.random.Generator) -> AffineMap:
    """Exactly uniform invertible affine map of F_p^2.

    Matrix entries are redrawn until the determinant is nonzero; the residue
    draws themselves are unbiased (numpy's bounded integer sampler rejects
    out-of-range words instead of reducing them).
    """
    while True:
        a, b, c, d = (int(e) for e in rng.integers(0, p, size=4))
        if (a * d - b * c) % p:
            break
    tx, ty = (int(e) for e in rng.integers(0, p, size=2))
    return AffineMap(((a, b), (c, d)), FpPoint(tx, ty, p), p)


def sample_uniform_affine_batch(p: int, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``n`` uniform invertible affine maps as arrays.

    Returns ``(mats, trans)`` with shapes (n, 4) and (n, 2); rows are
    (a, b, c, d) and (tx, ty). Singular matrices are discarded and the
    shortfall redrawn, which keeps each accepted row uniform over GL_2(F_p).
    """
    mats = np.empty((0, 4), dtype=np.int64)
    while len(mats) < n:
        need = n - len(mats)
        # singular fraction is about 1/p; overdraw so one round usually suffices
        draw = rng.integers(0, p, size=(need + need // max(p - 1, 1) + 16, 4), dtype=np.int64)
        det = (draw[:, 0] * draw[:, 3] - draw[:, 1] * draw[:, 2]) % p
        mats = np.concatenate([mats, draw[det != 0]])
    trans = rng.integers(0, p, size=(n, 2), dtype=np.int64)
    return mats[:n], trans


def iter_affine_maps(p: int) -> Iterator[AffineMap]:
    """Every invertible affine map of F_p^2 (p^2 (p^2-1)(p^2-p) of them)."""
    for a, b, c, d in _cartesian(range(p), repeat=4):
        if (a * d - b * c) % p == 0:
            continue
        for tx, ty in _cartesian(range(p), repeat=2):
            yield AffineMap(((a, b), (c, d)), FpPoint(tx, ty, p), p)
