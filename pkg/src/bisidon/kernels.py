"""Kernel dispatch.

The compiled Cython core is used when it imported successfully and the
operands fit its 64-bit arithmetic; otherwise the pure-Python module runs.
Set ``BISIDON_PURE_PYTHON=1`` before import to force the fallback. Both paths
return identical results, so seeded runs are reproducible across backends.
"""

from __future__ import annotations

import os

import numpy as np

from bisidon import _pykernels

_compiled = None
if os.environ.get("BISIDON_PURE_PYTHON") != "1":
    try:
        from bisidon import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _pykernels

# pair values must stay clear of int64 overflow
_SAFE = 1 << 61


def backend_module(name: str | None = None):
    """The kernel module for ``name`` ("cython" / "python"), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def _fits_int64(values: list[int], product: bool) -> bool:
    if not values:
        return True
    m = max(abs(min(values)), abs(max(values)))
    return (m * m if product else 2 * m) < _SAFE


def pair_energy(values: list[int], product: bool, backend: str | None = None) -> int:
    if not _fits_int64(values, product):
        return _pykernels.pair_energy_bigint(values, product)
    return backend_module(backend).pair_energy(np.array(values, dtype=np.int64), product)


def freiman_consistent(values: list[int], coords, p: int, backend: str | None = None) -> bool:
    if len(values) <= 1:
        return True
    d = len(coords[0])
    if not _fits_int64(values, False) or p**d >= _SAFE:
        return _pykernels.freiman_consistent_bigint(values, [list(map(int, row)) for row in coords], p)
    return bool(
        backend_module(backend).freiman_consistent(
            np.array(values, dtype=np.int64), np.asarray(coords, dtype=np.int64).reshape(len(values), d), p
        )
    )


def modular_images(values: list[int], p: int, thetas: list[int], backend: str | None = None):
    """Return an (n, d) int64 coordinate array and an (n,) bool retention array."""
    if not values:
        return np.empty((0, len(thetas)), dtype=np.int64), np.empty(0, dtype=bool)
    m = max(abs(min(values)), abs(max(values)))
    if m * p < (1 << 62) and p < (1 << 31):
        coords, ok = backend_module(backend).modular_images(
            np.array(values, dtype=np.int64), p, np.array(thetas, dtype=np.uint64)
        )
        return np.asarray(coords, dtype=np.int64), np.asarray(ok, dtype=bool)
    coords, ok = _pykernels.modular_images_bigint(values, p, thetas)
    return np.array(coords, dtype=np.int64).reshape(len(values), len(thetas)), np.array(ok, dtype=bool)


def parabola_hits(mats: np.ndarray, trans: np.ndarray, points, p: int, backend: str | None = None) -> int:
    return backend_module(backend).parabola_hits(mats, trans, np.asarray(points, dtype=np.int64).reshape(-1, 2), p)
