# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Reference semantics live in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t, uint32_t, uint8_t
from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memset

cnp.import_array()

cdef extern from *:
    ctypedef long long int128 "__int128"

cdef int64_t DENSE_WINDOW = 1 << 22
cdef int64_t MAX_PASS = 1 << 22
cdef int64_t DENSE_TABLE = 1 << 24


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline Py_ssize_t _lower_bound(const int64_t* v, Py_ssize_t lo, Py_ssize_t hi, int64_t x) noexcept nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if v[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline int64_t _floordiv(int64_t a, int64_t b) noexcept nogil:
    # b > 0
    cdef int64_t q = a / b
    if (a % b) != 0 and a < 0:
        q -= 1
    return q


cdef uint64_t _dense_energy(const int64_t* v, Py_ssize_t n, bint product,
                            int64_t lo, int64_t hi, int64_t W) except? 0:
    cdef uint32_t* cnt = <uint32_t*>malloc(W * sizeof(uint32_t))
    if cnt == NULL:
        raise MemoryError()
    cdef uint64_t total = 0
    cdef int64_t wlo = lo, whi, a, s, used, k
    cdef Py_ssize_t i, j, j0, j1
    with nogil:
        while wlo <= hi:
            whi = wlo + W
            memset(cnt, 0, W * sizeof(uint32_t))
            for i in range(n):
                a = v[i]
                if product:
                    j0 = _lower_bound(v, i, n, -_floordiv(-wlo, a))
                    j1 = _lower_bound(v, j0, n, _floordiv(whi - 1, a) + 1)
                else:
                    j0 = _lower_bound(v, i, n, wlo - a)
                    j1 = _lower_bound(v, j0, n, whi - a)
                for j in range(j0, j1):
                    s = a * v[j] if product else a + v[j]
                    cnt[s - wlo] += 1 if j == i else 2
            used = hi - wlo + 1
            if used > W:
                used = W
            for k in range(used):
                total += <uint64_t>cnt[k] * cnt[k]
            wlo = whi
    free(cnt)
    return total


cdef uint64_t _hashed_energy(const int64_t* v, Py_ssize_t n, bint product) except? 0:
    cdef int64_t npairs = <int64_t>n * (n + 1) // 2
    cdef int kb = 0
    while (npairs >> kb) > MAX_PASS:
        kb += 1
    cdef int64_t K = <int64_t>1 << kb
    cdef int64_t* sizes = <int64_t*>calloc(K, sizeof(int64_t))
    if sizes == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef int64_t s, bucket, cap, m
    cdef uint64_t h, idx, mask, total = 0
    cdef int64_t* keys
    cdef uint32_t* cnts
    if kb == 0:
        sizes[0] = npairs
    else:
        with nogil:
            for i in range(n):
                for j in range(i, n):
                    s = v[i] * v[j] if product else v[i] + v[j]
                    sizes[_mix(<uint64_t>s) >> (64 - kb)] += 1
    try:
        for bucket in range(K):
            m = sizes[bucket]
            if m == 0:
                continue
            cap = 16
            while cap < 2 * m:
                cap <<= 1
            mask = <uint64_t>(cap - 1)
            keys = <int64_t*>malloc(cap * sizeof(int64_t))
            cnts = <uint32_t*>calloc(cap, sizeof(uint32_t))
            if keys == NULL or cnts == NULL:
                free(keys)
                free(cnts)
                raise MemoryError()
            with nogil:
                for i in range(n):
                    for j in range(i, n):
                        s = v[i] * v[j] if product else v[i] + v[j]
                        h = _mix(<uint64_t>s)
                        if kb and <int64_t>(h >> (64 - kb)) != bucket:
                            continue
                        idx = h & mask
                        while cnts[idx] != 0 and keys[idx] != s:
                            idx = (idx + 1) & mask
                        if cnts[idx] == 0:
                            keys[idx] = s
                        cnts[idx] += 1 if i == j else 2
                for idx in range(<uint64_t>cap):
                    total += <uint64_t>cnts[idx] * cnts[idx]
            free(keys)
            free(cnts)
    finally:
        free(sizes)
    return total


def pair_energy(values, bint product):
    """Sum over s of r(s)^2 with r counting ordered pairs (a+b or a*b = s)."""
    cdef cnp.ndarray[int64_t, ndim=1] arr = np.ascontiguousarray(np.sort(np.asarray(values, dtype=np.int64)))
    cdef Py_ssize_t n = arr.shape[0]
    if n == 0:
        return 0
    v0, vn = int(arr[0]), int(arr[n - 1])
    if product:
        ext = (v0 * v0, v0 * vn, vn * vn)
        lo, hi = min(ext), max(ext)
    else:
        lo, hi = 2 * v0, 2 * vn
    span = hi - lo + 1
    npairs = n * (n + 1) // 2
    W = min(span, DENSE_WINDOW)
    nwin = -(-span // W)
    cdef const int64_t* v = &arr[0]
    if (not product or v0 > 0) and nwin * W <= 4 * npairs + DENSE_WINDOW and nwin * n <= 4 * npairs + n:
        return int(_dense_energy(v, n, product, lo, hi, W))
    return int(_hashed_energy(v, n, product))


def freiman_consistent(values, coords, int64_t p):
    """True iff equal pair sums always carry equal image sums mod p."""
    cdef cnp.ndarray[int64_t, ndim=1] varr = np.ascontiguousarray(values, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=2] carr = np.ascontiguousarray(coords, dtype=np.int64)
    cdef Py_ssize_t n = varr.shape[0]
    if n <= 1:
        return True
    cdef Py_ssize_t d = carr.shape[1]
    cdef cnp.ndarray[int64_t, ndim=1] warr = np.array([p ** k for k in range(d)], dtype=np.int64)
    cdef const int64_t* v = &varr[0]
    cdef const int64_t* c = &carr[0, 0]
    cdef const int64_t* w = &warr[0]
    lo = 2 * int(varr.min())
    span = 2 * int(varr.max()) - lo + 1
    if span <= DENSE_TABLE:
        return _freiman_dense(v, c, w, n, d, p, lo, span)
    return _freiman_hashed(v, c, w, n, d, p)


cdef inline int64_t _pack(const int64_t* c, const int64_t* w, Py_ssize_t i, Py_ssize_t j,
                          Py_ssize_t d, int64_t p) noexcept nogil:
    cdef int64_t img = 0
    cdef Py_ssize_t k
    for k in range(d):
        img += ((c[i * d + k] + c[j * d + k]) % p) * w[k]
    return img


cdef bint _freiman_dense(const int64_t* v, const int64_t* c, const int64_t* w, Py_ssize_t n,
                         Py_ssize_t d, int64_t p, int64_t lo, int64_t span) except -1:
    cdef int64_t* tbl = <int64_t*>malloc(span * sizeof(int64_t))
    if tbl == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef int64_t key, img
    cdef bint ok = True
    with nogil:
        for i in range(span):
            tbl[i] = -1
        for i in range(n):
            if not ok:
                break
            for j in range(i, n):
                key = v[i] + v[j] - lo
                img = _pack(c, w, i, j, d, p)
                if tbl[key] < 0:
                    tbl[key] = img
                elif tbl[key] != img:
                    ok = False
                    break
    free(tbl)
    return ok


cdef bint _freiman_hashed(const int64_t* v, const int64_t* c, const int64_t* w, Py_ssize_t n,
                          Py_ssize_t d, int64_t p) except -1:
    cdef int64_t npairs = <int64_t>n * (n + 1) // 2
    cdef int kb = 0
    while (npairs >> kb) > MAX_PASS:
        kb += 1
    cdef int64_t K = <int64_t>1 << kb, bucket, cap = 16, s, img, biggest = npairs
    cdef Py_ssize_t i, j
    cdef int64_t* sizes
    if kb:
        sizes = <int64_t*>calloc(K, sizeof(int64_t))
        if sizes == NULL:
            raise MemoryError()
        with nogil:
            for i in range(n):
                for j in range(i, n):
                    sizes[_mix(<uint64_t>(v[i] + v[j])) >> (64 - kb)] += 1
        biggest = 0
        for bucket in range(K):
            if sizes[bucket] > biggest:
                biggest = sizes[bucket]
        free(sizes)
    while cap < 2 * biggest:
        cap <<= 1
    cdef uint64_t mask = <uint64_t>(cap - 1), h, idx
    cdef int64_t* keys = <int64_t*>malloc(cap * sizeof(int64_t))
    cdef int64_t* imgs = <int64_t*>malloc(cap * sizeof(int64_t))
    cdef uint8_t* used = <uint8_t*>malloc(cap)
    cdef bint ok = True
    if keys == NULL or imgs == NULL or used == NULL:
        free(keys)
        free(imgs)
        free(used)
        raise MemoryError()
    with nogil:
        for bucket in range(K):
            if not ok:
                break
            memset(used, 0, cap)
            for i in range(n):
                if not ok:
                    break
                for j in range(i, n):
                    s = v[i] + v[j]
                    h = _mix(<uint64_t>s)
                    if kb and <int64_t>(h >> (64 - kb)) != bucket:
                        continue
                    img = _pack(c, w, i, j, d, p)
                    idx = h & mask
                    while used[idx] and keys[idx] != s:
                        idx = (idx + 1) & mask
                    if not used[idx]:
                        used[idx] = 1
                        keys[idx] = s
                        imgs[idx] = img
                    elif imgs[idx] != img:
                        ok = False
                        break
    free(keys)
    free(imgs)
    free(used)
    return ok


def modular_images(values, int64_t p, thetas):
    """Coordinates [p*theta_i*a] mod p (theta_i = k_i / 2**63) and retention flags."""
    cdef cnp.ndarray[int64_t, ndim=1] varr = np.ascontiguousarray(values, dtype=np.int64)
    cdef cnp.ndarray[uint64_t, ndim=1] tarr = np.ascontiguousarray(thetas, dtype=np.uint64)
    cdef Py_ssize_t n = varr.shape[0], d = tarr.shape[0], i, k
    cdef cnp.ndarray[int64_t, ndim=2] coords = np.empty((n, d), dtype=np.int64)
    cdef cnp.ndarray[uint8_t, ndim=1] ok = np.ones(n, dtype=np.uint8)
    cdef int128 x, fl
    cdef int64_t frac, r
    cdef int64_t mask63 = 0x7FFFFFFFFFFFFFFF
    cdef int64_t half = <int64_t>1 << 62
    with nogil:
        for i in range(n):
            for k in range(d):
                x = <int128>tarr[k] * <int128>(varr[i] * p)
                fl = x >> 63
                frac = <int64_t>(x & <int128>mask63)
                r = <int64_t>(fl % p)
                if r < 0:
                    r += p
                coords[i, k] = r
                if frac >= half:
                    ok[i] = 0
    return coords, ok.view(np.bool_)


def parabola_hits(mats, trans, points, int64_t p):
    """Number of affine maps (rows) whose image of the standard parabola holds every point."""
    cdef cnp.ndarray[int64_t, ndim=2] M = np.ascontiguousarray(mats, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=2] T = np.ascontiguousarray(trans, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=2] P = np.ascontiguousarray(points, dtype=np.int64)
    cdef Py_ssize_t n = M.shape[0], m = P.shape[0], i, k
    cdef int64_t a, b, c, d, det, dx, dy, X, Y, hits = 0
    cdef bint on
    with nogil:
        for i in range(n):
            a = M[i, 0]
            b = M[i, 1]
            c = M[i, 2]
            d = M[i, 3]
            det = ((a * d - b * c) % p + p) % p
            on = True
            for k in range(m):
                dx = ((P[k, 0] - T[i, 0]) % p + p) % p
                dy = ((P[k, 1] - T[i, 1]) % p + p) % p
                X = ((d * dx - b * dy) % p + p) % p
                Y = ((a * dy - c * dx) % p + p) % p
                if (Y * det - X * X) % p != 0:
                    on = False
                    break
            if on:
                hits += 1
    return int(hits)
