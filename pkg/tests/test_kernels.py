"""Compiled and pure-Python kernels must agree bit for bit."""

import os
import subprocess
import sys
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bisidon import _pykernels, kernels
from bisidon.exactnum import sample_uniform_affine_batch
from bisidon.streams import derive_seed, make_rng, mix64, substream

needs_ext = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])

int_sets = st.lists(st.integers(-10**6, 10**6), min_size=0, max_size=60, unique=True)


def energy_by_counter(values, product):
    c = Counter(a * b if product else a + b for a in values for b in values)
    return sum(v * v for v in c.values())


# ---------------------------------------------------------------- streams


def test_derive_seed_matches_splitmix64_reference():
    # first outputs of SplitMix64 started from state 0
    assert derive_seed(0, 0) == 0xE220A8397B1DCDAF
    assert derive_seed(0, 1) == 0x6E789E6AA1B965F4
    assert derive_seed(0, 2) == 0x06C45D188009454F


def test_mix64_is_injective_on_sample():
    xs = list(range(10_000)) + [(1 << 64) - 1 - i for i in range(10_000)]
    assert len({mix64(x) for x in xs}) == len(xs)


def test_substreams_are_reproducible_and_distinct():
    a = substream(5, 3).integers(0, 1 << 62, size=4).tolist()
    b = substream(5, 3).integers(0, 1 << 62, size=4).tolist()
    c = substream(5, 4).integers(0, 1 << 62, size=4).tolist()
    assert a == b != c


# ---------------------------------------------------------------- energy


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("product", [False, True])
@given(values=int_sets)
def test_pair_energy_matches_counter(backend, product, values):
    vals = sorted(values)
    assert kernels.pair_energy(vals, product, backend) == energy_by_counter(vals, product)


@pytest.mark.parametrize("product", [False, True])
def test_bigint_path_matches(product):
    vals = sorted([3**70, 5**60, 7**50, 2**200, 11**40, 3**70 + 5**60 - 7**50])
    assert kernels.pair_energy(vals, product) == energy_by_counter(vals, product)


@needs_ext
@pytest.mark.parametrize("product", [False, True])
def test_large_interval_energy_agrees(product):
    vals = list(range(1, 1501))
    ref = _pykernels.pair_energy(np.array(vals, dtype=np.int64), product)
    assert kernels.pair_energy(vals, product, "cython") == ref


def test_additive_energy_of_interval_closed_form():
    n = 4096
    assert kernels.pair_energy(list(range(1, n + 1)), False) == (2 * n**3 + n) // 3


# ---------------------------------------------------------------- Freiman / modular


@pytest.mark.parametrize("backend", BACKENDS)
@given(values=st.lists(st.integers(1, 10**9), min_size=1, max_size=40, unique=True), seed=st.integers(0, 2**32))
def test_modular_images_agree_with_bigint(backend, values, seed):
    p = 101
    vals = sorted(values)
    thetas = make_rng(seed).integers(0, 1 << 63, size=2, dtype=np.uint64).tolist()
    coords, ok = kernels.modular_images(vals, p, thetas, backend)
    ref_c, ref_ok = _pykernels.modular_images_bigint(vals, p, thetas)
    assert np.asarray(coords).tolist() == [list(r) for r in ref_c]
    assert np.asarray(ok).tolist() == list(ref_ok)


@pytest.mark.parametrize("backend", BACKENDS)
@given(values=st.lists(st.integers(1, 500), min_size=2, max_size=30, unique=True), seed=st.integers(0, 2**32))
def test_freiman_consistency_agrees(backend, values, seed):
    p = 7
    vals = sorted(values)
    coords = make_rng(seed).integers(0, p, size=(len(vals), 2)).tolist()
    ref = _pykernels.freiman_consistent_bigint(vals, coords, p)
    assert kernels.freiman_consistent(vals, coords, p, backend) == ref


@pytest.mark.parametrize("backend", BACKENDS)
def test_linear_map_is_freiman(backend):
    p = 1009
    vals = list(range(1, 400, 3))
    coords = [[(5 * a) % p, (17 * a) % p] for a in vals]
    assert kernels.freiman_consistent(vals, coords, p, backend)
    coords[7] = [(coords[7][0] + 1) % p, coords[7][1]]
    assert not kernels.freiman_consistent(vals, coords, p, backend)


# ---------------------------------------------------------------- parabola hits


@needs_ext
@pytest.mark.parametrize("p", [3, 5, 37])
def test_parabola_hits_agree(p):
    mats, trans = sample_uniform_affine_batch(p, 50_000, make_rng(p))
    pts = np.array([[0, 0], [1, 0], [0, 1]])
    assert kernels.parabola_hits(mats, trans, pts, p, "python") == kernels.parabola_hits(mats, trans, pts, p, "cython")


def test_forced_fallback_selects_python():
    env = dict(os.environ, BISIDON_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from bisidon import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
