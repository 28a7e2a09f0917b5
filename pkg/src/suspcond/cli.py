"""Command-line entry point.

Every numeric result is printed as ``key=value`` lines. With ``--out`` the
lines are also written to that file and a ``<out>.manifest`` file records the
command, its parameters, the tool version and the wall-clock duration.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import ComputationError, SuspCondError, ValidationError
from .report import format_kv

DEFAULT_SEEDS = tuple(range(1, 11))


@dataclass
class RunManifest:
    command: str
    params: dict
    version: str = __version__
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    duration_s: float = 0.0

    def as_dict(self) -> dict:
        out = {"command": self.command, "version": self.version}
        out.update({f"param.{k}": v for k, v in sorted(self.params.items())})
        out["inputs"] = ",".join(self.inputs)
        out["outputs"] = ",".join(self.outputs)
        out["duration_s"] = self.duration_s
        return out


class _Parser(argparse.ArgumentParser):
    """Usage errors print the synopsis and exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _Output:
    def __init__(self, out: str | None, stream=None):
        self.path = Path(out) if out else None
        self.stream = stream or sys.stdout
        self.fh = open(self.path, "w", encoding="utf-8") if self.path else None

    def write(self, items: dict) -> None:
        text = format_kv(items)
        self.stream.write(text)
        self.stream.flush()
        if self.fh:
            self.fh.write(text)
            self.fh.flush()

    def close(self):
        if self.fh:
            self.fh.close()


def _rmax(args) -> int:
    from .lattice_sums import FAST_RMAX

    return FAST_RMAX if getattr(args, "fast", False) else args.rmax


def _evaluator(args):
    from .eisenstein import EisensteinEvaluator
    from .lattice_sums import coulombic_table

    return EisensteinEvaluator(coulombic_table(_rmax(args)), d_max=args.dmax)


# ------------------------------------------------------------------ commands

def cmd_generate(args, out: _Output, man: RunManifest):
    from .geometry import generate_rsa, write_packing

    cfg = generate_rsa(args.n, args.f, args.seed, max_attempts=args.max_attempts)
    if args.out:
        write_packing(cfg, args.out, comment=f"generate n={args.n} f={args.f!r} seed={args.seed}")
    out.write({"N": cfg.n, "r0": cfg.radius, "f": cfg.concentration, "seed": args.seed,
               "attempts": cfg.attempts, "min_distance": cfg.min_distance()})


def cmd_lattice_sums(args, out: _Output, man: RunManifest):
    from .lattice_sums import coulombic_table

    t = coulombic_table(_rmax(args))
    out.write({**t.as_dict(), "rmax": t.rmax})


def _load(args, man):
    from .geometry import read_packing

    man.inputs.append(args.input)
    return read_packing(args.input)


def cmd_structural_sums(args, out: _Output, man: RunManifest):
    from .structural_sums import compute_structural_sums

    cfg = _load(args, man)
    sums = compute_structural_sums(cfg, _evaluator(args))
    out.write(sums.as_dict())


def cmd_conductivity(args, out: _Output, man: RunManifest):
    from .conductivity import conductivity_report
    from .structural_sums import compute_structural_sums

    cfg = _load(args, man)
    rep = conductivity_report(compute_structural_sums(cfg, _evaluator(args)), cfg.concentration, args.beta)
    out.write(rep.as_dict())


def cmd_anisotropy(args, out: _Output, man: RunManifest):
    from .conductivity import conductivity_report
    from .structural_sums import compute_structural_sums

    cfg = _load(args, man)
    rep = conductivity_report(compute_structural_sums(cfg, _evaluator(args)), cfg.concentration)
    items = {}
    for name, mat in (("Lambda2", rep.Lambda2), ("dev", rep.deviator)):
        for i in range(3):
            for j in range(3):
                items[f"{name}_{i + 1}{j + 1}"] = float(mat[i, j])
    items["kappa"] = rep.kappa
    items["kappa_normalized"] = rep.kappa_normalized
    out.write(items)


def cmd_expand(args, out: _Output, man: RunManifest):
    from .symbolic import procedure_u, to_sexpr, to_text

    axis = args.axis if args.axis == "j" else int(args.axis)
    e = procedure_u(args.order, axis=axis)
    render = to_sexpr if args.format == "sexpr" else to_text
    out.write({"order": args.order, "axis": args.axis, "anchor": f"a{args.order}", "u": render(e)})


def cmd_verify_symbolic(args, out: _Output, man: RunManifest):
    import numpy as np

    from .symbolic import procedure_u
    from .symbolic.numeric import gradient_formula, numeric_gradient
    from .symbolic.oracle import fixed_point_oracle, order_estimates, random_cluster

    centers = random_cluster(args.n, args.seed)
    radii = [args.r0 / 2**i for i in range(args.levels)]
    items = {"n": args.n, "seed": args.seed}
    for i, r in enumerate(radii):
        items[f"r0_{i + 1}"] = r
    for q in args.orders:
        e = procedure_u(q)
        res, slopes = order_estimates(e, q, centers, radii, degree=args.degree)
        for i, v in enumerate(res):
            items[f"q{q}_residual_{i + 1}"] = v
        for i, s in enumerate(slopes):
            items[f"q{q}_slope_{i + 1}"] = s
        items[f"q{q}_expected_slope"] = q + 1
    e6 = procedure_u(6)
    sol = fixed_point_oracle(centers, args.r0, degree=args.degree)
    gap_formula = gap_oracle = 0.0
    for k in range(len(centers)):
        g_sym = numeric_gradient(e6, centers, centers[k], anchor=(6, k), r0=args.r0)[0]
        gap_formula = max(gap_formula, abs(g_sym - gradient_formula(centers, k, args.r0)))
        gap_oracle = max(gap_oracle, abs(g_sym - sol.gradient(k)[0]))
    items["gradient_gap_formula"] = float(gap_formula)
    items["gradient_gap_oracle"] = float(gap_oracle)
    items["oracle_constants"] = " ".join(repr(float(c)) for c in np.asarray(sol.constants))
    out.write(items)


def cmd_reproduce_table1(args, out: _Output, man: RunManifest):
    from .conductivity import f3_coefficient
    from .geometry import generate_rsa
    from .structural_sums import compute_structural_sums

    ev = _evaluator(args)
    keys = ("e11", "conv_11_11", "conv_12_12", "conv_13_13")
    acc = {k: [] for k in keys}
    acc["f3_coefficient"] = []
    convs = (("11", "11"), ("12", "12"), ("13", "13"))
    for seed in args.seeds:
        cfg = generate_rsa(args.n, args.f, seed)
        s = compute_structural_sums(cfg, ev, convolutions=convs)
        row = {"e11": s.e11, "conv_11_11": s.c("11", "11"),
               "conv_12_12": s.c("12", "12"), "conv_13_13": s.c("13", "13")}
        row["f3_coefficient"] = f3_coefficient(row["conv_11_11"], row["conv_12_12"], row["conv_13_13"])
        for k, v in row.items():
            acc[k].append(v)
        out.write({f"seed{seed}_{k}": v for k, v in row.items()})
    means = {k: math.fsum(v) / len(v) for k, v in acc.items()}
    summary = {f"mean_{k}": means[k] for k in keys}
    summary["mean_f3_coefficient"] = means["f3_coefficient"]
    summary["f3_coefficient_of_means"] = f3_coefficient(
        means["conv_11_11"], means["conv_12_12"], means["conv_13_13"])
    summary["seeds"] = len(args.seeds)
    out.write(summary)


# ------------------------------------------------------------------ parser

def _add_sum_flags(p, with_dmax=True):
    from .lattice_sums import DEFAULT_RMAX

    p.add_argument("--rmax", type=int, default=DEFAULT_RMAX, help="lattice-sum truncation radius")
    if with_dmax:
        p.add_argument("--dmax", type=int, default=8, choices=(2, 4, 6, 8),
                       help="highest polynomial degree of the kernel expansion")
    p.add_argument("--fast", action="store_true", help="use rmax=60")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="suspcond", description="Effective conductivity of sphere suspensions.")
    parser.add_argument("--version", action="version", version=f"suspcond {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="RSA packing")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--f", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-attempts", type=int, default=10**6)
    p.add_argument("--out", help="packing file to write")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("lattice-sums", help="Coulombic lattice sums L4..L10")
    _add_sum_flags(p, with_dmax=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_lattice_sums)

    for name, func, help_ in (
        ("structural-sums", cmd_structural_sums, "structural sums of a packing"),
        ("conductivity", cmd_conductivity, "conductivity tensor report"),
        ("anisotropy", cmd_anisotropy, "second-order tensor, deviator and kappa"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--in", dest="input", required=True, help="packing file")
        _add_sum_flags(p)
        if name == "conductivity":
            p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("expand", help="analytic approximation u(q)")
    p.add_argument("--order", type=int, default=6, choices=range(1, 7), metavar="{1..6}")
    p.add_argument("--axis", default="j", choices=("j", "1", "2", "3"))
    p.add_argument("--format", default="text", choices=("text", "sexpr"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("verify-symbolic", help="compare u(q) with the numeric oracle")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--r0", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--orders", type=int, nargs="+", default=[3, 6])
    p.add_argument("--levels", type=int, default=3, help="number of radii r0, r0/2, ...")
    p.add_argument("--degree", type=int, default=12, help="oracle harmonic degree")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_symbolic)

    p = sub.add_parser("reproduce-table1", help="RSA structural-sum statistics")
    p.add_argument("--seeds", type=int, nargs="+", default=list(DEFAULT_SEEDS))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--f", type=float, default=0.3)
    _add_sum_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce_table1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    man = RunManifest(args.command, params)
    # generate writes its packing to --out; its summary goes to stdout only
    out = _Output(None if args.command == "generate" else getattr(args, "out", None))
    if getattr(args, "out", None):
        man.outputs.insert(0, args.out)
    start = time.perf_counter()
    try:
        args.func(args, out, man)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SuspCondError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    finally:
        out.close()
    man.duration_s = time.perf_counter() - start
    if getattr(args, "out", None):
        Path(args.out + ".manifest").write_text(format_kv(man.as_dict()), encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
