"""Command-line front end.

    phasediff qfi --probe coherent --n 1 --delta pi/9
    phasediff simulate --n 4.12 --delta pi/9 --samples 100 --seed 7 --out run.txt
    phasediff estimate run.txt --n 4.12 --delta pi/9
    phasediff fig3 --seed 1 --out fig3/
    phasediff fig4-delta --seed 1 --out fig4/
    phasediff fig4-n --seed 1 --out fig4/
"""
from __future__ import annotations

import argparse
import ast
import json
import logging
import math
import operator
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .bayes import DEFAULT_GRID, MIN_GRID, PriorKind, estimate, posterior_from_samples, resolve_prior
from .fockspace import NoiseLevel, ProbeSpec
from .homodyne import EmptySampleError, HomodyneSample, LikelihoodModel, sample_homodyne
from .metrology import analytic_qfi, qfi

log = logging.getLogger("phasediff")


class SampleFileError(ValueError):
    pass


# -- sample files ----------------------------------------------------------

def write_samples(path: str | Path, sample: HomodyneSample) -> None:
    lines = [f"# theta={sample.theta!r}"] + [repr(float(x)) for x in sample.x]
    Path(path).write_text("\n".join(lines) + "\n")


def ingest_samples(path: str | Path) -> HomodyneSample:
    """Parse a ``# theta=<radians>`` header followed by one outcome per line."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"sample file not found: {path}")
    theta = None
    values = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if theta is None:
                if not line.startswith("#") or "theta=" not in line:
                    raise SampleFileError(f"{path}:{lineno}: expected header '# theta=<radians>'")
                try:
                    theta = parse_angle(line.split("theta=", 1)[1].strip())
                except ValueError as err:
                    raise SampleFileError(f"{path}:{lineno}: bad theta in header: {err}") from None
                continue
            if line.startswith("#"):
                continue
            try:
                x = float(line)
            except ValueError:
                raise SampleFileError(f"{path}:{lineno}: malformed value {line!r}") from None
            if not math.isfinite(x):
                raise SampleFileError(f"{path}:{lineno}: non-finite value {line!r}")
            values.append(x)
    if theta is None:
        raise SampleFileError(f"{path}: missing '# theta=<radians>' header")
    if not values:
        raise EmptySampleError(f"{path}: no samples after the header")
    log.info("read %d samples from %s", len(values), path)
    return HomodyneSample(np.array(values), theta)


# -- argument parsing --------------------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_angle(text: str) -> float:
    """Radians as a float or a small arithmetic expression in ``pi`` (e.g. ``pi/9``)."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported angle expression {text!r}")
    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError):
        raise ValueError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"angle must be finite: {text!r}")
    return value


def _angle(text):
    try:
        return parse_angle(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err))


def _int_list(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", help="output file (or directory for fig* commands)")
    common.add_argument("--json", action="store_true", help="print a JSON summary on stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--n", type=float, help="mean photon number N")
    model.add_argument("--delta", type=_angle, help="phase diffusion delta, radians")
    model.add_argument("--true-phi", type=_angle, default=math.pi / 2, help="true phase (default pi/2)")
    model.add_argument("--prior", choices=[k.value for k in PriorKind], default="uniform")
    model.add_argument("--grid", type=int, default=DEFAULT_GRID, help="posterior grid nodes")

    parser = argparse.ArgumentParser(prog="phasediff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfi", parents=[common], help="quantum Fisher information of a diffused probe")
    p.add_argument("--probe", choices=["coherent", "sqvac"], default="coherent")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--delta", type=_angle, default=0.0)

    p = sub.add_parser("simulate", parents=[common, model], help="draw synthetic homodyne data")
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("estimate", parents=[common, model], help="Bayesian phase estimate from a sample file")
    p.add_argument("file")

    p = sub.add_parser("fig3", parents=[common, model], help="K_M versus M")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--m-list", type=_int_list, default=ex.FIG3_M)

    for name, helptext in (("fig4-delta", "V_M versus delta"), ("fig4-n", "V_M versus N")):
        p = sub.add_parser(name, parents=[common, model], help=helptext)
        p.add_argument("--reps", type=int, default=200)
        p.add_argument("--samples", type=int, default=100, help="M per point (default 100)")
    return parser


def _validate(args, parser):
    def bad(msg):
        parser.error(msg)
    if getattr(args, "n", None) is not None and args.n < 0:
        bad(f"--n must be >= 0, got {args.n}")
    if getattr(args, "delta", None) is not None and args.delta < 0:
        bad(f"--delta must be >= 0, got {args.delta}")
    if getattr(args, "samples", 1) < 1:
        bad(f"--samples must be >= 1, got {args.samples}")
    if getattr(args, "reps", 1) < 1:
        bad(f"--reps must be >= 1, got {args.reps}")
    if hasattr(args, "m_list") and (not args.m_list or min(args.m_list) < 1):
        bad("--m-list entries must be >= 1")
    if getattr(args, "grid", MIN_GRID) < MIN_GRID:
        bad(f"--grid must be >= {MIN_GRID}")
    if getattr(args, "true_phi", 1.0) is not None and not 0 <= getattr(args, "true_phi", 1.0) <= math.pi:
        bad("--true-phi must lie in [0, pi]")
    if args.command in ("simulate", "estimate") and (args.n is None or args.delta is None):
        bad(f"{args.command} needs --n and --delta")


# -- commands ----------------------------------------------------------------

def _emit(args, payload: dict, text: str | None = None):
    """JSON commands: write to --out if given, always echo JSON on stdout."""
    blob = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(blob + "\n")
    if args.json or text is None:
        print(blob)
    else:
        print(text)


def cmd_qfi(args):
    probe = ProbeSpec.from_mean_photons(args.probe, args.n)
    res = qfi(probe, NoiseLevel(args.delta))
    payload = {"qfi": res.value, "probe": args.probe, "n": args.n, "delta": args.delta,
               "analytic_noiseless": analytic_qfi(probe), "dim": res.dim}
    _emit(args, payload)


def cmd_simulate(args):
    model = LikelihoodModel.from_mean_photons(args.n, args.delta)
    sample = sample_homodyne(model, args.true_phi, args.samples, np.random.default_rng(args.seed))
    if args.out:
        write_samples(args.out, sample)
    else:
        sys.stdout.write(f"# theta={sample.theta!r}\n" + "".join(f"{x!r}\n" for x in sample.x))
    if args.json:
        print(json.dumps({"samples": len(sample), "n": args.n, "delta": args.delta,
                          "true_phi": args.true_phi, "seed": args.seed, "out": args.out}))


def cmd_estimate(args):
    sample = ingest_samples(args.file)
    model = LikelihoodModel.from_mean_photons(args.n, args.delta)
    prior = resolve_prior(args.prior, model, args.grid)
    res = estimate(posterior_from_samples(model, sample, prior, args.grid), len(sample), args.prior)
    h_alpha = ex.coherent_qfi(args.n, args.delta)
    payload = {"phi_B": res.phi_b, "variance": res.variance, "M": res.m, "prior": res.prior_kind,
               "n": args.n, "delta": args.delta, "theta": sample.theta, "grid": args.grid,
               "qfi_coherent": h_alpha, "K_M": res.m * res.variance * h_alpha}
    _emit(args, payload)


def _tag(value: float) -> str:
    return f"{value:.4f}".rstrip("0").rstrip(".").replace(".", "p")


def _write_tables(args, default_dir: str, tables: dict[str, list[dict]]):
    out = Path(args.out or default_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, rows in tables.items():
        (out / name).write_text(ex.to_csv(rows))
        log.info("wrote %s", out / name)
    if args.json:
        print(json.dumps({name: rows for name, rows in tables.items()}, indent=2))
    else:
        for name in tables:
            print(out / name)


def cmd_fig3(args):
    cases = ex.FIG3_CASES
    if args.n is not None or args.delta is not None:
        ns = [args.n] if args.n is not None else sorted({c[0] for c in cases})
        ds = [args.delta] if args.delta is not None else sorted({c[1] for c in cases})
        cases = [(n, d) for n in ns for d in ds]
    tables = {}
    for n, d in cases:
        cfg = ex.RunConfig(n=n, delta=d, true_phi=args.true_phi, m_list=args.m_list,
                           repetitions=args.reps, master_seed=args.seed, prior_kind=args.prior,
                           grid=args.grid)
        tables[f"km_n{_tag(n)}_delta{_tag(d)}.csv"] = ex.summarize(ex.run_km_curve(cfg), "km")
    _write_tables(args, "fig3", tables)


def _fig4(args, axis):
    if axis == "delta":
        curves = [args.n] if args.n is not None else ex.FIG4_DELTA_CURVES
        grid, fixed = ex.FIG4_DELTAS, "n"
    else:
        curves = [args.delta] if args.delta is not None else ex.FIG4_N_CURVES
        grid, fixed = ex.FIG4_NS, "delta"
    tables = {}
    for c in curves:
        template = ex.RunConfig(n=c if fixed == "n" else 1.0, delta=c if fixed == "delta" else 0.0,
                                true_phi=args.true_phi, repetitions=args.reps,
                                master_seed=args.seed, prior_kind=args.prior, grid=args.grid)
        points = ex.run_vm_sweep(template, axis, grid, m=args.samples)
        tables[f"vm_{axis}_{fixed}{_tag(c)}.csv"] = ex.summarize(points, "vm")
    _write_tables(args, "fig4", tables)


COMMANDS = {
    "qfi": cmd_qfi,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "fig3": cmd_fig3,
    "fig4-delta": lambda a: _fig4(a, "delta"),
    "fig4-n": lambda a: _fig4(a, "n"),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as err:
        print(f"phasediff {args.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
