"""Pure-Python / numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable (or disabled by
``BISIDON_PURE_PYTHON=1``). Signatures and results match the compiled
versions exactly; these accept int64 numpy arrays whose pair sums/products
fit in 62 bits. Arbitrary-size integers go through the ``*_bigint`` helpers.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from bisidon.exactnum import hash_key

_CHUNK_PAIRS = 1 << 22


def _row_chunks(n: int):
    """Yield row ranges [i0, i1) whose upper-triangle pair count is bounded."""
    i0 = 0
    while i0 < n:
        i1, count = i0, 0
        while i1 < n and (count == 0 or count + (n - i1) <= _CHUNK_PAIRS):
            count += n - i1
            i1 += 1
        yield i0, i1
        i0 = i1


def _pair_block(v: np.ndarray, i0: int, i1: int, product: bool):
    """Upper-triangle pair values for rows i0..i1 plus 1/2 multiplicity weights."""
    vals, wts = [], []
    for i in range(i0, i1):
        tail = v[i:]
        vals.append(tail * v[i] if product else tail + v[i])
        w = np.full(len(tail), 2, dtype=np.int64)
        w[0] = 1
        wts.append(w)
    return np.concatenate(vals), np.concatenate(wts)


def pair_energy(values: np.ndarray, product: bool) -> int:
    """Sum over s of r(s)^2, r(s) = #ordered pairs with a+b = s (or a*b = s)."""
    v = np.sort(np.asarray(values, dtype=np.int64))
    n = len(v)
    if n == 0:
        return 0
    totals: Counter = Counter()
    for i0, i1 in _row_chunks(n):
        vals, wts = _pair_block(v, i0, i1, product)
        keys, inv = np.unique(vals, return_inverse=True)
        r = np.bincount(inv, weights=wts).astype(np.int64)
        if i0 == 0 and i1 == n:
            return int(np.dot(r, r))
        totals.update(dict(zip(keys.tolist(), r.tolist())))
    return sum(c * c for c in totals.values())


def freiman_consistent(values: np.ndarray, coords: np.ndarray, p: int) -> bool:
    """True iff equal pair sums always carry equal image sums (mod p per coordinate).

    ``coords`` has shape (n, d) with entries in [0, p).
    """
    v = np.asarray(values, dtype=np.int64)
    c = np.asarray(coords, dtype=np.int64)
    n = len(v)
    if n <= 1:
        return True
    d = c.shape[1]
    weights = np.array([p**k for k in range(d)], dtype=np.int64)
    seen: dict[int, int] = {}
    for i0, i1 in _row_chunks(n):
        keys, imgs = [], []
        for i in range(i0, i1):
            keys.append(v[i:] + v[i])
            imgs.append(((c[i:] + c[i]) % p) @ weights)
        k = np.concatenate(keys)
        g = np.concatenate(imgs)
        order = np.lexsort((g, k))
        k, g = k[order], g[order]
        starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
        ends = np.r_[starts[1:], len(k)] - 1
        if np.any(g[starts] != g[ends]):
            return False
        for key, img in zip(k[starts].tolist(), g[starts].tolist()):
            if seen.setdefault(key, img) != img:
                return False
    return True


def modular_images(values: np.ndarray, p: int, thetas: np.ndarray):
    """Coordinates [p*theta_i*a] mod p and the half-open retention flags.

    ``thetas`` holds the numerators k_i of theta_i = k_i / 2**63. Returns an
    (n, d) int64 coordinate array and an (n,) bool array that is True iff
    frac(p * theta_i * a) < 1/2 for every i.
    """
    coords, ok = modular_images_bigint([int(a) for a in values], p, [int(t) for t in thetas])
    return np.array(coords, dtype=np.int64).reshape(len(ok), len(thetas)), np.array(ok, dtype=bool)


def modular_images_bigint(values: list[int], p: int, thetas: list[int]):
    mask = (1 << 63) - 1
    half = 1 << 62
    coords, ok = [], []
    for a in values:
        m = p * a
        row, keep = [], True
        for k in thetas:
            x = k * m
            row.append((x >> 63) % p)
            keep = keep and (x & mask) < half
        coords.append(row)
        ok.append(keep)
    return coords, ok


def parabola_hits(mats: np.ndarray, trans: np.ndarray, points: np.ndarray, p: int) -> int:
    """Number of maps g (rows) with every point lying on g(P0), P0 = {(t, t^2)}.

    v lies on g(P0) iff w = M^-1 (v - t) has w_y = w_x^2; with adj(M) (v - t)
    = (X, Y) that is Y * det = X^2, avoiding an inverse mod p.
    """
    mats = np.asarray(mats, dtype=np.int64)
    trans = np.asarray(trans, dtype=np.int64)
    a, b, c, d = mats[:, 0], mats[:, 1], mats[:, 2], mats[:, 3]
    det = (a * d - b * c) % p
    hit = np.ones(len(mats), dtype=bool)
    for x, y in np.asarray(points, dtype=np.int64):
        dx = (x - trans[:, 0]) % p
        dy = (y - trans[:, 1]) % p
        X = (d * dx - b * dy) % p
        Y = (a * dy - c * dx) % p
        hit &= (Y * det - X * X) % p == 0
    return int(hit.sum())


# ---------------------------------------------------------------- bigints


def pair_energy_bigint(values: list[int], product: bool) -> int:
    # sorted runs rather than a Counter: int hashes are taken mod 2**61 - 1, so
    # structured inputs such as powers of two collide into very few buckets
    v = sorted(values)
    pairs = []
    for i, a in enumerate(v):
        pairs.append((a * a if product else a + a, 1))
        pairs.extend((a * b if product else a + b, 2) for b in v[i + 1 :])
    pairs.sort()
    total, prev, run = 0, None, 0
    for key, w in pairs:
        if key != prev:
            total += run * run
            prev, run = key, 0
        run += w
    return total + run * run


def freiman_consistent_bigint(values: list[int], coords: list[list[int]], p: int) -> bool:
    seen: dict[int, tuple[int, ...]] = {}
    n = len(values)
    for i in range(n):
        for j in range(i, n):
            img = tuple((x + y) % p for x, y in zip(coords[i], coords[j]))
            if seen.setdefault(hash_key(values[i] + values[j]), img) != img:
                return False
    return True
