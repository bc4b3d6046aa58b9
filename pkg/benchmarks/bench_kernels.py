"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Every kernel is run on the same inputs through both backends; results are
checked for equality before timings are reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bisidon import kernels
from bisidon.exactnum import sample_uniform_affine_batch
from bisidon.streams import make_rng


def best_time(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(quick: bool):
    n = 2000 if quick else 8000
    rng = make_rng(1)
    interval = list(range(1, n + 1))
    spread = sorted(int(x) for x in rng.choice(10**9, size=n, replace=False) + 1)
    p = 4001
    thetas = rng.integers(0, 1 << 63, size=2, dtype=np.uint64).tolist()
    coords = np.array([[(3 * a) % p, (7 * a) % p] for a in interval], dtype=np.int64)
    mats, trans = sample_uniform_affine_batch(37, 200_000 if quick else 1_000_000, rng)
    pts = np.array([[0, 0], [1, 0], [0, 1]])
    yield f"sum energy, interval n={n}", lambda b: kernels.pair_energy(interval, False, b)
    yield f"product energy, interval n={n}", lambda b: kernels.pair_energy(interval, True, b)
    yield f"sum energy, spread n={n}", lambda b: kernels.pair_energy(spread, False, b)
    yield f"modular images n={n}", lambda b: tuple(map(np.ndarray.tolist, kernels.modular_images(spread, p, thetas, b)))
    yield f"Freiman check n={n}", lambda b: kernels.freiman_consistent(interval, coords, p, b)
    yield f"parabola hits {len(mats)} maps", lambda b: kernels.parabola_hits(mats, trans, pts, 37, b)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernels unavailable; only the Python backend can run")
        return
    print(f"{'kernel':40s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, fn in cases(args.quick):
        tp, rp = best_time(lambda: fn("python"), args.repeat)
        tc, rc = best_time(lambda: fn("cython"), args.repeat)
        if rp != rc:
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:40s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
