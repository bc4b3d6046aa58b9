"""Scaling experiment: run the extractor over growing inputs and fit |S| ~ N^k."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, Sequence

from bisidon.extractor import ExtractorConfig, extract
from bisidon.lab.datasets import gen_dataset
from bisidon.streams import derive_seed, substream

CSV_COLUMNS = ("kind", "N", "trial", "seed", "branch", "p", "size_A2", "size_B", "size_Btilde", "size_S", "wall_ms")
EXPERIMENT_KINDS = ("interval", "geometric", "random")


@dataclass(frozen=True)
class ExperimentRow:
    kind: str
    N: int
    trial: int
    seed: int
    branch: str
    p: int
    size_A2: int
    size_B: int
    size_Btilde: int
    size_S: int
    wall_ms: float

    def check(self) -> None:
        """Size chain of one extraction: |S| <= |B~| <= |B| <= |A''| <= N."""
        if not self.size_S <= self.size_Btilde <= self.size_B <= self.size_A2 <= self.N:
            raise AssertionError(f"inconsistent sizes in row {self}")


def dataset_seed(seed: int, kind_index: int, n: int) -> int:
    return derive_seed(seed, (kind_index << 40) | n)


def _run_row(args) -> ExperimentRow:
    kind, kind_index, n, trial, cfg, timing = args
    ds_seed = dataset_seed(cfg.seed, kind_index, n)
    data = gen_dataset(kind, {"n": n}, substream(ds_seed, 0) if kind == "random" else None)
    row_seed = derive_seed(ds_seed, trial + 1)
    t0 = time.perf_counter()
    res = extract(data.elements, replace(cfg, seed=row_seed))
    wall = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
    tr = res.trace
    return ExperimentRow(
        kind, n, trial, row_seed, tr.branch.value, tr.p,
        tr.size_A2, tr.size_B, tr.size_Btilde, len(res.subset), round(wall, 3),
    )


def scaling_experiment(
    kinds: Sequence[str],
    N_list: Sequence[int],
    trials: int,
    cfg: ExtractorConfig | None = None,
    workers: int = 1,
    timing: bool = True,
) -> list[ExperimentRow]:
    """One extract call per (kind, N, trial), rows sorted by (kind, N, trial).

    Seeds depend only on ``cfg.seed`` and the row coordinates, so the output
    is identical for any ``workers`` (apart from wall_ms when timing is on).
    """
    if not N_list:
        raise ValueError("N_list must be nonempty")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    cfg = cfg or ExtractorConfig()
    jobs = []
    for kind in kinds:
        if kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unsupported experiment kind {kind!r}")
        ki = EXPERIMENT_KINDS.index(kind)
        for n in N_list:
            jobs.extend((kind, ki, int(n), t, cfg, timing) for t in range(trials))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_row, jobs))
    else:
        rows = [_run_row(job) for job in jobs]
    return sorted(rows, key=lambda r: (r.kind, r.N, r.trial))


def medians_by_n(rows: Iterable[ExperimentRow]) -> dict[int, float]:
    groups: dict[int, list[int]] = {}
    for r in rows:
        groups.setdefault(r.N, []).append(r.size_S)
    return {n: statistics.median(v) for n, v in sorted(groups.items())}


def fit_exponent(rows: Iterable[ExperimentRow]) -> float:
    """Least-squares slope of log(median |S|) against log N."""
    med = medians_by_n(rows)
    if len(med) < 2:
        raise ValueError("need at least two distinct N to fit a slope")
    if min(med.values()) <= 0:
        raise ValueError("a median |S| of 0 has no logarithm")
    xs = [math.log(n) for n in med]
    ys = [math.log(m) for m in med.values()]
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    sxx = sum((x - xbar) ** 2 for x in xs)
    return sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sxx


def rows_to_csv(rows: Iterable[ExperimentRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        d = asdict(r)
        d["wall_ms"] = f"{r.wall_ms:.3f}"
        w.writerow([d[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ExperimentRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    types = {f.name: f.type for f in fields(ExperimentRow)}
    conv = {"int": int, "float": float, "str": str}
    return [ExperimentRow(**{k: conv[types[k]](v) for k, v in rec.items()}) for rec in reader]
