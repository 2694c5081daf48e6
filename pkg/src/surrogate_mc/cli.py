"""
``smc`` command line: fit, sample, surrogate, diagnose, toy.

Data goes to files (or standard output); progress and errors go to
standard error. Every command that writes to a path also writes a JSON
manifest holding the exact argument vector and the resolved settings, so
rerunning ``smc <argv>`` from the manifest reproduces the outputs byte for
byte.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .anneal import AnnealConfig, run_realizations
from .diagnostics import (PANEL_COLUMNS, acf_panels, ar1_generate, phase_diagram,
                          sine_generate, sv_generate, write_tsv)
from .empirical import EmpiricalDistribution, fit_empirical_cdf, folded_cdf, sample_iid
from .features import FeatureSpec, rho
from .ingest import log_returns, parse_price_csv, read_series, write_series

log = logging.getLogger("surrogate_mc")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_ITER = 2
EXIT_FROZEN = 3
_EXIT_FOR = {"goal": EXIT_OK, "max_iterations": EXIT_MAX_ITER, "frozen": EXIT_FROZEN}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    return int(os.environ.get("SMC_SEED", "0"))


def _num(text: str):
    return "auto" if text == "auto" else ("band" if text == "band" else float(text))


def _column(text: str | None):
    if text is None:
        return None
    return int(text) if text.lstrip("-").isdigit() else text


def _load_input(args) -> np.ndarray:
    """Returns from a price file, or a plain series when ``--series`` is set."""
    if args.series:
        return read_series(args.input)
    prices = parse_price_csv(args.input, _column(args.price_col))
    return log_returns(prices, args.interval).values


def _write_manifest(path: Path, args, argv, **extra):
    config = {k: v for k, v in vars(args).items() if k != "func"}
    body = {"program": "smc", "version": __version__, "argv": list(argv),
            "config": config, **extra}
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


# -- subcommands ---------------------------------------------------------------

def cmd_fit(args, argv) -> int:
    dist = fit_empirical_cdf(_load_input(args))
    if args.out is None:
        _print_table(np.column_stack([dist.sorted_values, dist.cdf_levels]))
        return EXIT_OK
    dist.save(args.out, header=f"empirical CDF of {args.input} ({len(dist)} knots)")
    _write_manifest(Path(f"{args.out}.manifest.json"), args, argv, knots=len(dist))
    return EXIT_OK


def cmd_sample(args, argv) -> int:
    dist = EmpiricalDistribution.load(args.dist)
    draw = sample_iid(dist, args.n, args.seed)
    if args.out is None:
        _print_table(draw.values[:, None])
        return EXIT_OK
    write_series(args.out, draw.values)
    _write_manifest(Path(f"{args.out}.manifest.json"), args, argv)
    return EXIT_OK


def _feature_spec(args) -> FeatureSpec:
    if args.spec is not None:
        spec = FeatureSpec.load(args.spec)
    elif args.preset is not None:
        spec = FeatureSpec.preset(args.preset)
    else:
        spec = FeatureSpec.stylized(args.L, args.K)
    return spec.with_mode("paper-literal") if args.paper_literal else spec


def cmd_surrogate(args, argv) -> int:
    x = _load_input(args)
    spec = _feature_spec(args)
    target = rho(x, spec)
    dist = fit_empirical_cdf(x)
    cfg = AnnealConfig(initial_temp=args.initial_temp, cooling_factor=args.cooling,
                       max_success=args.max_success, max_total=args.max_total,
                       goal=args.goal, max_iterations=args.max_iterations,
                       seed=args.seed, log_every=args.log_every)

    def progress(k, it, delta, temp):
        if not args.quiet:
            print(f"[{k}] iteration {it} delta {delta:.6g} T {temp:.4g}", file=sys.stderr)

    reports = run_realizations(args.n_real, args.seed, dist, target, spec, cfg,
                               n=x.size, workers=args.workers, progress=progress)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_series(out / "target.txt", x, header=f"target returns from {args.input}")
    runs = []
    for k, rep in enumerate(reports):
        name = f"realization_{k}.txt"
        write_series(out / name, rep.final_series,
                     header=f"realization {k}, seed {rep.seed}, {rep.terminated_by}")
        np.savetxt(out / f"trajectory_{k}.tsv", rep.trajectory, delimiter="\t",
                   header="iteration\tdelta\ttemperature", fmt="%.17g")
        runs.append({"file": name, **rep.summary()})
    _write_manifest(out / "manifest.json", args, argv, feature_spec=spec.to_dict(),
                    anneal_config=reports[0].config | {"seed": None},
                    realizations=runs)
    return max(_EXIT_FOR[r.terminated_by] for r in reports)


def cmd_diagnose(args, argv) -> int:
    x = read_series(args.target)
    z = read_series(args.surrogate)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panels = acf_panels(x, z, args.L, args.K)
    notes = ("band: 99% white-noise half-width 2.576/sqrt(N - lag) around the target",)
    summary = {}
    for key, fname in (("abs", "acf_abs.tsv"), ("lev", "acf_lev.tsv"), ("ret", "acf_ret.tsv")):
        p = panels[key]
        write_tsv(out / fname, PANEL_COLUMNS, p.table(), notes)
        summary[key] = {"lags": int(p.lags.size), "inside": int(p.inside.sum())}
    rows = []
    for label, series in (("target", x), ("surrogate", z)):
        for xv, pv in folded_cdf(fit_empirical_cdf(series)):
            rows.append((label, xv, pv))
    write_tsv(out / "cdf_fold.tsv", ("source", "x", "p"), np.array(rows, dtype=object),
              ("p = CDF(x) for x <= 0, 1 - CDF(x) for x > 0",))
    write_tsv(out / "phase.tsv", ("z_t", "z_t_plus_lag"), phase_diagram(z, args.phase_lag).points,
              (f"phase diagram of the surrogate, lag {args.phase_lag}",))
    conventions = {"band": notes[0], "phase_lag": f"(z_t, z_(t+{args.phase_lag}))"}
    _write_manifest(out / "manifest.json", args, argv, panels=summary, conventions=conventions)
    return EXIT_OK


def cmd_toy(args, argv) -> int:
    if args.model == "ar1":
        z = ar1_generate(args.p, args.n, args.seed, args.burn_in)
        header = f"AR(1) p={args.p} n={args.n} seed={args.seed}"
    elif args.model == "sv":
        z = sv_generate(args.n, args.seed)
        header = f"stochastic volatility n={args.n} seed={args.seed}"
    else:
        z = sine_generate(args.T, args.n)
        header = f"sine T={args.T} n={args.n}"
    if args.out is None:
        _print_table(z[:, None])
        return EXIT_OK
    write_series(args.out, z, header=header)
    _write_manifest(Path(f"{args.out}.manifest.json"), args, argv)
    return EXIT_OK


def _print_table(table):
    w = sys.stdout
    for row in np.atleast_2d(table):
        w.write("\t".join(repr(float(v)) for v in row) + "\n")


# -- parser ----------------------------------------------------------------------

def _add_input(p):
    p.add_argument("--input", required=True, help="price file (delimited, with header)")
    p.add_argument("--price-col", default=None,
                   help="price column name or zero-based index (default: Adj Close/Close)")
    p.add_argument("--interval", type=int, default=1, help="return interval in rows")
    p.add_argument("--series", action="store_true",
                   help="input is already a return series, one value per line")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smc", description="Surrogate Monte Carlo time series generator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="write the empirical CDF table of a return series")
    _add_input(p)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw i.i.d. values from a CDF table")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("surrogate", help="anneal i.i.d. draws into surrogate realizations")
    _add_input(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--spec", default=None, help="feature spec JSON file")
    g.add_argument("--preset", choices=["sp500"], default=None,
                   help="sp500: L=40, K=200 with the four stylized-fact terms")
    p.add_argument("--L", type=int, default=10, help="max lag of return/leverage terms")
    p.add_argument("--K", type=int, default=50, help="max lag of volatility terms")
    p.add_argument("--paper-literal", action="store_true",
                   help="compare summed features instead of per-lag discrepancies")
    p.add_argument("--n-real", type=int, default=1)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out-dir", required=True)
    p.add_argument("--max-iterations", type=int, default=AnnealConfig.max_iterations)
    p.add_argument("--goal", type=_num, default="band", help="objective target or 'band'")
    p.add_argument("--initial-temp", type=_num, default="auto")
    p.add_argument("--cooling", type=float, default=AnnealConfig.cooling_factor)
    p.add_argument("--max-success", type=int, default=None)
    p.add_argument("--max-total", type=int, default=None)
    p.add_argument("--log-every", type=int, default=AnnealConfig.log_every)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(func=cmd_surrogate)

    p = sub.add_parser("diagnose", help="write ACF panels, folded CDF and phase data")
    p.add_argument("--target", required=True, help="target return series file")
    p.add_argument("--surrogate", required=True, help="surrogate series file")
    p.add_argument("--L", type=int, default=40)
    p.add_argument("--K", type=int, default=200)
    p.add_argument("--phase-lag", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("toy", help="generate toy series")
    toys = p.add_subparsers(dest="model", required=True, parser_class=_Parser)
    t = toys.add_parser("ar1")
    t.add_argument("--p", type=float, default=0.6)
    t.add_argument("--n", type=int, default=10000)
    t.add_argument("--seed", type=int, default=_default_seed())
    t.add_argument("--burn-in", type=int, default=0)
    t.add_argument("--out", default=None)
    t = toys.add_parser("sine")
    t.add_argument("--T", type=int, default=200)
    t.add_argument("--n", type=int, default=10000)
    t.add_argument("--out", default=None)
    t = toys.add_parser("sv")
    t.add_argument("--n", type=int, default=2000)
    t.add_argument("--seed", type=int, default=_default_seed())
    t.add_argument("--out", default=None)
    p.set_defaults(func=cmd_toy)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args, argv)
    except (ValueError, OSError) as exc:
        print(f"smc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def replay(manifest_path) -> int:
    """Rerun the command recorded in a manifest."""
    with open(manifest_path) as fh:
        return main(json.load(fh)["argv"])


if __name__ == "__main__":
    sys.exit(main())
