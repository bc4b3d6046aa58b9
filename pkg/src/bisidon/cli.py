"""Command line interface: ``bisidon <command>``.

Exit codes: 0 success, 2 invalid input, 3 precondition violation.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from bisidon.embedding import EmbeddingPreconditionError
from bisidon.energy import Operation, energy_report, find_witness, is_additive_sidon, is_multiplicative_sidon
from bisidon.exactnum import FpPoint, as_rational, format_rational, is_prime
from bisidon.extractor import Branch, ExtractorConfig, extract
from bisidon.lab.datasets import InputFormatError, format_set, gen_dataset, read_set_file
from bisidon.lab.experiment import fit_exponent, medians_by_n, rows_to_csv, scaling_experiment
from bisidon.lab.oracle import DEFAULT_ORACLE_LIMIT, OracleLimitError, energy_by_enumeration, max_bi_sidon_exact
from bisidon.parabola import estimate_containment_probability, triple_containment_probability_exact
from bisidon.streams import make_rng

EXIT_INVALID = 2
EXIT_PRECONDITION = 3

BRANCHES = {"auto": Branch.AUTO, "add-first": Branch.ADDITIVE_FIRST, "mul-first": Branch.MULTIPLICATIVE_FIRST}


class Rational(click.ParamType):
    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return as_rational(value)
        except (TypeError, ValueError) as exc:
            self.fail(str(exc), param, ctx)


RATIONAL = Rational()


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _emit(obj) -> None:
    click.echo(json.dumps(obj, indent=2))


def _load(path: str) -> list[Fraction]:
    try:
        return read_set_file(path)
    except OSError as exc:
        _fail(EXIT_INVALID, f"cannot read {path}: {exc.strerror}")
    except InputFormatError as exc:
        _fail(EXIT_INVALID, f"{path}: {exc}")


def _strs(values) -> list[str]:
    return [format_rational(v) for v in values]


@click.group()
@click.version_option(package_name="artifact", message="%(version)s")
def main():
    """Bi-Sidon subsets of rational sets: energies, extraction, oracles, experiments."""


@main.command()
@click.option("--kind", type=click.Choice(["interval", "geometric", "random", "pds"]), required=True)
@click.option("--n", "n", type=int, help="Number of elements.")
@click.option("--gamma", type=RATIONAL, default="2", show_default=True, help="Ratio for geometric sets.")
@click.option("--max", "max_value", type=int, help="Upper bound for random sets (default N^2).")
@click.option("--p", "p", type=int, help="Order of the perfect difference set.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default="-", help="Output file (default stdout).")
def gen(kind, n, gamma, max_value, p, seed, output):
    """Write a dataset, one value per line."""
    if kind == "pds":
        if p is None:
            _fail(EXIT_INVALID, "--p is required for pds")
        params = {"p": p}
    else:
        if n is None:
            _fail(EXIT_INVALID, f"--n is required for {kind}")
        params = {"n": n}
        if kind == "geometric":
            params["gamma"] = gamma
        if kind == "random" and max_value is not None:
            params["max"] = max_value
    try:
        data = gen_dataset(kind, params, make_rng(seed))
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    shown = " ".join(f"{k}={format_rational(v) if isinstance(v, Fraction) else v}" for k, v in params.items())
    text = format_set(data.elements, header=f"kind={kind} {shown} seed={seed}")
    if output == "-":
        click.echo(text, nl=False)
    else:
        Path(output).write_text(text, encoding="utf-8")


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--oracle", is_flag=True, help="Also count by direct enumeration and compare.")
def energy(path, oracle):
    """Additive and multiplicative energy of a set."""
    vals = _load(path)
    try:
        rep = energy_report(vals)
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    out = {
        "n": rep.set_size,
        "additive_energy": rep.additive_energy,
        "multiplicative_energy": rep.multiplicative_energy,
    }
    if oracle:
        try:
            add = energy_by_enumeration(vals, Operation.SUM)
            mul = energy_by_enumeration(vals, Operation.PRODUCT)
        except OracleLimitError as exc:
            _fail(EXIT_PRECONDITION, str(exc))
        out["oracle_agrees"] = add == rep.additive_energy and mul == rep.multiplicative_energy
    _emit(out)


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
def verify(path):
    """Sidon predicates with a violating quadruple when one exists."""
    vals = _load(path)
    if any(v == 0 for v in vals):
        _fail(EXIT_INVALID, "0 is not allowed in multiplicative contexts")
    add = is_additive_sidon(vals)
    mul = is_multiplicative_sidon(vals)
    witness = None
    for ok, op in ((add, Operation.SUM), (mul, Operation.PRODUCT)):
        if not ok:
            w = find_witness(vals, op)
            witness = {"operation": op.value, "kind": w.kind.value, "elements": _strs(w.elements)}
            break
    _emit({"additive_sidon": add, "multiplicative_sidon": mul, "bi_sidon": add and mul, "witness": witness})


def _trace_json(trace, timing: bool) -> dict:
    return {
        "branch": trace.branch.value,
        "additive_energy": trace.additive_energy,
        "multiplicative_energy": trace.multiplicative_energy,
        "p": trace.p,
        "size_A": trace.size_A,
        "size_A2": trace.size_A2,
        "size_B": trace.size_B,
        "size_Btilde": trace.size_Btilde,
        "size_S": trace.size_S,
        "quadruples_E0": trace.quadruples_E0,
        "quadruples_E1": trace.quadruples_E1,
        "removals": trace.removals,
        "q": format_rational(trace.q),
        "seed": trace.seed,
        "negated": trace.negated,
        "wall_ms": round(trace.wall_ms, 3) if timing else 0.0,
    }


@main.command("extract")
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--trials", type=int, default=32, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--c", "c", type=RATIONAL, default="1/1024", show_default=True, help="Sparsification constant.")
@click.option("--q", "q", type=RATIONAL, default=None, help="Fixed keep probability (overrides c).")
@click.option("--p", "p", type=int, default=None, help="Prime for the modular embedding.")
@click.option("--d", "d", type=int, default=2, show_default=True)
@click.option("--branch", type=click.Choice(list(BRANCHES)), default="auto", show_default=True)
@click.option("--no-adaptive", is_flag=True, help="Use c as given, without the pilot sweep.")
@click.option("--json", "as_json", is_flag=True, help="Print subset and trace as JSON.")
@click.option("--no-timing", is_flag=True, help="Report wall_ms as 0 so output is reproducible.")
@click.option("--workers", type=int, default=1, show_default=True)
def extract_cmd(path, trials, seed, c, q, p, d, branch, no_adaptive, as_json, no_timing, workers):
    """Extract a large bi-Sidon subset (best of several seeded trials)."""
    vals = _load(path)
    if p is not None and (p < 3 or not is_prime(p)):
        _fail(EXIT_INVALID, f"--p {p} must be an odd prime")
    try:
        cfg = ExtractorConfig(
            c=c, q_override=q, p_override=p, d=d, trials=trials,
            branch=BRANCHES[branch], adaptive_c=not no_adaptive, seed=seed,
        )
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    try:
        res = extract(vals, cfg, workers=max(1, workers))
    except EmbeddingPreconditionError as exc:
        _fail(EXIT_PRECONDITION, str(exc))
    if as_json:
        _emit({"subset": _strs(res.subset), "trace": _trace_json(res.trace, not no_timing)})
    else:
        click.echo(format_set(res.subset), nl=False)


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--limit", type=int, default=DEFAULT_ORACLE_LIMIT, show_default=True)
def oracle(path, limit):
    """Exact maximum bi-Sidon subset by branch and bound."""
    vals = _load(path)
    try:
        best = max_bi_sidon_exact(vals, limit=limit)
    except OracleLimitError as exc:
        _fail(EXIT_PRECONDITION, str(exc))
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    _emit({"max_size": len(best), "subset": _strs(best)})


def _parse_points(text: str, p: int) -> list[FpPoint]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, sep, y = chunk.partition(",")
        if not sep:
            raise ValueError(f"point {chunk!r} is not of the form x,y")
        pts.append(FpPoint(int(x) % p, int(y) % p, p))
    return pts


@main.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--exact", "mode", flag_value="exact", help="Exact probability for a noncollinear triple.")
@click.option("--mc", "mode", flag_value="mc", help="Monte-Carlo estimate for the given points.")
@click.option("--trials", type=int, default=1_000_000, show_default=True)
@click.option("--points", type=str, default=None, help='Points as "x,y;x,y;..."')
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
def parabola(p, mode, trials, points, seed, workers):
    """Probability that a random parabola of F_p^2 contains given points."""
    if p < 3 or not is_prime(p):
        _fail(EXIT_INVALID, f"--p {p} must be an odd prime")
    if mode is None:
        _fail(EXIT_INVALID, "choose --exact or --mc")
    if mode == "exact":
        prob = triple_containment_probability_exact(p)
        _emit({"p": p, "probability": format_rational(prob), "probability_float": float(prob)})
        return
    if not points:
        _fail(EXIT_INVALID, "--mc needs --points")
    try:
        pts = _parse_points(points, p)
        est, err = estimate_containment_probability(pts, trials, seed, workers=max(1, workers))
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    _emit({
        "p": p,
        "points": [list(v.xy) for v in pts],
        "trials": trials,
        "estimate": float(est),
        "hits": int(est * trials),
        "stderr": float(err),
    })


@main.group()
def experiment():
    """Experiment harness."""


@experiment.command()
@click.option("--kind", "kinds", multiple=True, type=click.Choice(["interval", "geometric", "random"]), required=True)
@click.option("--nmin", type=int, required=True)
@click.option("--nmax", type=int, required=True)
@click.option("--factor", type=int, default=2, show_default=True)
@click.option("--trials", type=int, default=20, show_default=True, help="Rows per (kind, N).")
@click.option("--extract-trials", type=int, default=32, show_default=True, help="Trials inside each extract call.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--no-timing", is_flag=True, help="Write wall_ms as 0 so the CSV is reproducible.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def scaling(kinds, nmin, nmax, factor, trials, extract_trials, seed, workers, no_timing, output):
    """Run extract over N = nmin, nmin*factor, ... <= nmax and write a CSV."""
    if nmin < 1 or nmax < nmin or factor < 2 or trials < 1:
        _fail(EXIT_INVALID, "need 1 <= nmin <= nmax, factor >= 2 and trials >= 1")
    ns = []
    n = nmin
    while n <= nmax:
        ns.append(n)
        n *= factor
    try:
        cfg = ExtractorConfig(trials=extract_trials, seed=seed)
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))
    rows = scaling_experiment(list(kinds), ns, trials, cfg, workers=max(1, workers), timing=not no_timing)
    Path(output).write_text(rows_to_csv(rows), encoding="utf-8")
    summary = {}
    for kind in kinds:
        sub = [r for r in rows if r.kind == kind]
        try:
            slope = fit_exponent(sub)
        except ValueError:
            slope = None
        summary[kind] = {"medians": {str(k): v for k, v in medians_by_n(sub).items()}, "exponent": slope}
    _emit({"rows": len(rows), "output": output, "fits": summary})


if __name__ == "__main__":
    main()
