"""Command-line entry point: ``deltan <subcommand> ...``.

Generation commands require ``--seed``.  The worker count comes from
``--workers`` or the DELTAN_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import subprocess
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import io as dio
from .ensembles import EnergySpectrum, EnsembleConfig, realization
from .errors import DeltanError
from .parallel import WORKERS_ENV
from .pipeline import FIGURE_TAGS, _jsonable, _now, emit_plot_bundle, run_pipeline, verify_manifest
from .significance import estimate_reference, p_curve
from .spinchain import SpinChainConfig, build_basis, realize_chain, window_bounds
from .stats import DeltaSquaredAccumulator, PowerAccumulator, delta_array, power_spectrum, ratio_stats
from .theory import FAMILIES, theory_curve
from .unfolding import (
    levels_from_spacings,
    partition,
    reunfold,
    spacings,
    trim_edges,
    unfold_gaussian_exact,
    unfold_polynomial,
    unfold_semicircle,
)

ENSEMBLE_NAMES = {"gde": "GDE", "goe": "GOE", "beta": "BetaEnsemble", "poisson": "PoissonSpacings"}


def _manifest(out, command, config, seed=None):
    return dio.RunManifest(command, config, seed, __version__, _now(), root=str(out))


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _inputs(paths):
    files = []
    for p in paths:
        p = Path(p)
        if not p.exists():
            raise DeltanError(f"input {p} does not exist")
        files.extend(sorted(p.glob("*.csv")) if p.is_dir() else [p])
    if not files:
        raise DeltanError("no input CSV files found")
    return files


# --------------------------------------------------------------------------
# subcommands


def cmd_generate(args):
    out = Path(args.out)
    cfg = EnsembleConfig(ENSEMBLE_NAMES[args.ensemble], args.dim, args.realizations, args.seed,
                         beta=args.beta, lam=args.lam, goe_method=args.goe_method)
    m = _manifest(out, "generate", _jsonable(vars(cfg)), args.seed)
    for r in range(args.realizations):
        item = realization(cfg, r)
        if cfg.kind == "PoissonSpacings":
            item = EnergySpectrum(np.cumsum(item.spacings), r, cfg)
        m.add(dio.write_spectrum(out / f"spectrum_{r:06d}.csv", item), "spectrum")
    m.finished = _now()
    return m.write()


def cmd_chain(args):
    out = Path(args.out)
    cfg = SpinChainConfig(args.L, args.omega, coupling=args.coupling, boundary=args.boundary,
                          sz_sector=args.sz, seed=args.seed)
    basis = build_basis(cfg.sites, cfg.sz_sector)
    lo, hi = window_bounds(basis.dimension, args.fraction)
    m = _manifest(out, "chain", dict(_jsonable(vars(cfg)), fraction=args.fraction), args.seed)
    for r in range(args.realizations):
        spec = realize_chain(cfg, r, basis)
        spec.levels, spec.provenance = spec.levels[lo:hi], cfg
        m.add(dio.write_spectrum(out / f"spectrum_{r:06d}.csv", spec), "spectrum")
    m.finished = _now()
    return m.write()


def _unfold_one(levels, method):
    if method == "gaussian":
        return unfold_gaussian_exact(levels)
    if method == "semicircle":
        return unfold_semicircle(levels)
    if method.startswith("poly"):
        degree = int(method.split(":", 1)[1]) if ":" in method else 6
        return unfold_polynomial(levels, degree)
    raise DeltanError(f"unknown unfolding method {method!r}")


def cmd_unfold(args):
    out = Path(args.out)
    m = _manifest(out, "unfold", {k: v for k, v in vars(args).items() if k != "func"})
    for f in _inputs(args.inputs):
        spec = dio.read_spectrum(f)
        E = trim_edges(spec.levels, args.trim) if args.trim else spec.levels
        u = _unfold_one(E, args.method)
        if args.trim and args.method.startswith("poly"):
            u = trim_edges(u, args.trim)
        parts = partition(u, args.partition) if args.partition > 1 else [u]
        for j, part in enumerate(parts):
            if args.reunfold:
                seq = reunfold(spacings(part))
                part.levels = levels_from_spacings(part.levels[0], seq)
                part.method += "+reunfold"
            suffix = f"_part{j:03d}" if len(parts) > 1 else ""
            m.add(dio.write_unfolded(out / f"{f.stem}{suffix}.csv", part, spec.provenance, spec.realization_index), "unfolded")
    m.finished = _now()
    return m.write()


def cmd_stats(args):
    out = Path(args.out)
    m = _manifest(out, "stats", {"inputs": [str(p) for p in args.inputs], "bins": args.bins})
    pacc = dacc = None
    levels = []
    for f in _inputs(args.inputs):
        u, _, _ = dio.read_unfolded(f)
        d = delta_array(np.diff(u.levels))
        if u.method.endswith("+reunfold"):
            d[-1] = 0.0
        if pacc is None:
            pacc, dacc = PowerAccumulator(d.size), DeltaSquaredAccumulator(d.size)
        pacc.add(power_spectrum(d)[None, :])
        dacc.add((d**2)[None, :])
        levels.append(u.levels)
    m.add(dio.write_power(out / "power.csv", pacc.estimate()), "power")
    m.add(dio.write_delta2(out / "delta2.csv", dacc.estimate()), "delta2")
    m.add(dio.write_ratio_hist(out / "ratio.csv", ratio_stats(levels, bins=args.bins)), "ratio")
    m.finished = _now()
    return m.write()


def cmd_theory(args):
    return dio.write_theory(args.out, theory_curve(args.family, args.dim))


def cmd_ptest(args):
    ref = estimate_reference(dio.read_power(args.reference))
    theory = theory_curve(args.theory, ref.dim)
    report = p_curve(ref, theory.values, _ints(args.M), args.alpha)
    path = dio.write_report(args.out, report)
    frac = report.pass_fraction()
    for M, f in zip(report.M_list, frac):
        print(f"M={M:>7d}  pass fraction {f:.4f}")
    return path


def cmd_crossover(args):
    out = Path(args.out)
    cfg = {"schema_version": 1, "recipe": "crossover", "seed": args.seed, "sites": args.L,
           "omegas": _floats(args.omegas), "realizations": args.realizations, "fraction": args.fraction,
           "trim": args.trim, "degree": args.degree, "matched": not args.no_matched}
    if args.calibration_realizations is not None:
        cfg["calibration_realizations"] = args.calibration_realizations
    if args.beta_grid:
        cfg["beta_grid"] = tuple(_floats(args.beta_grid))
    m = run_pipeline(cfg, out, args.workers, command="crossover")
    print((out / "summary.csv").read_text(), end="")
    return m


def cmd_plot(args):
    for tag in args.tag:
        bundle = emit_plot_bundle(args.manifest, tag, args.out)
        print(f"{tag}: {len(bundle.series)} series")


def cmd_run(args):
    m = run_pipeline(args.config, args.out, args.workers)
    print(f"wrote {len(m.outputs)} outputs to {args.out}")
    return m


def cmd_verify(args):
    if args.manifest:
        res = verify_manifest(args.manifest, args.workers)
        for path, ok in res.compared.items():
            print(f"{'identical' if ok else 'DIFFERENT'}  {path}")
        for path in res.missing:
            print(f"missing    {path}")
        if not res.ok:
            return 1
    if args.acceptance or not args.manifest:
        tests = Path(args.tests) if args.tests else Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"
        return subprocess.call([sys.executable, "-m", "pytest", "-v", "-s", str(tests)])
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deltan", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--workers", type=int, default=None, help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    # also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample ensemble spectra")
    g.add_argument("--ensemble", choices=sorted(ENSEMBLE_NAMES), required=True)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--realizations", type=int, default=1)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--beta", type=float, default=1.0)
    g.add_argument("--lam", type=float, default=1.0)
    g.add_argument("--goe-method", choices=("dense", "tridiagonal"), default="dense")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("chain", parents=[common], help="diagonalize disordered Heisenberg chains")
    c.add_argument("--L", type=int, required=True)
    c.add_argument("--omega", type=float, required=True)
    c.add_argument("--realizations", type=int, default=1)
    c.add_argument("--fraction", type=float, default=1.0 / 3.0)
    c.add_argument("--coupling", type=float, default=1.0)
    c.add_argument("--boundary", choices=("periodic", "open"), default="periodic")
    c.add_argument("--sz", type=float, default=0.0)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_chain)

    u = sub.add_parser("unfold", parents=[common], help="unfold spectrum CSVs")
    u.add_argument("inputs", nargs="+")
    u.add_argument("--method", default="gaussian", help="gaussian | semicircle | poly:<degree>")
    u.add_argument("--trim", type=int, default=0)
    u.add_argument("--reunfold", action="store_true")
    u.add_argument("--partition", type=int, default=1)
    u.add_argument("--out", required=True)
    u.set_defaults(func=cmd_unfold)

    s = sub.add_parser("stats", parents=[common], help="power spectrum, <delta_n^2> and ratios of unfolded CSVs")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--bins", type=int, default=50)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stats)

    t = sub.add_parser("theory", parents=[common], help="theoretical power-spectrum curve")
    t.add_argument("--family", choices=sorted(FAMILIES), required=True)
    t.add_argument("--dim", type=int, required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_theory)

    pt = sub.add_parser("ptest", parents=[common], help="p-value report of a theory against a reference power CSV")
    pt.add_argument("--reference", required=True)
    pt.add_argument("--theory", choices=sorted(FAMILIES), default="goe")
    pt.add_argument("--M", default="10,30,100,300,1000,3000,10000,30000")
    pt.add_argument("--alpha", type=float, default=0.05)
    pt.add_argument("--out", required=True)
    pt.set_defaults(func=cmd_ptest)

    x = sub.add_parser("crossover", parents=[common], help="spin-chain disorder sweep with matched beta-ensembles")
    x.add_argument("--L", type=int, default=12)
    x.add_argument("--omegas", default="0.4,0.6,0.8,1,1.4,2,3,4,5,7")
    x.add_argument("--realizations", type=int, default=200)
    x.add_argument("--fraction", type=float, default=1.0 / 3.0)
    x.add_argument("--trim", type=int, default=8)
    x.add_argument("--degree", type=int, default=6)
    x.add_argument("--calibration-realizations", type=int, default=None)
    x.add_argument("--beta-grid", default=None, help="ascending comma list of beta values")
    x.add_argument("--no-matched", action="store_true")
    x.add_argument("--seed", type=int, required=True)
    x.add_argument("--out", required=True)
    x.set_defaults(func=cmd_crossover)

    pl = sub.add_parser("plot", parents=[common], help="plot bundle for a manifest")
    pl.add_argument("manifest")
    pl.add_argument("--tag", action="append", choices=FIGURE_TAGS, required=True)
    pl.add_argument("--out", default=None)
    pl.set_defaults(func=cmd_plot)

    r = sub.add_parser("run", parents=[common], help="run a config file")
    r.add_argument("config")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", parents=[common], help="re-run a manifest and compare digests; without one, run the acceptance suite")
    v.add_argument("manifest", nargs="?")
    v.add_argument("--acceptance", action="store_true")
    v.add_argument("--tests", default=None, help="path of the acceptance module")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            result = args.func(args)
    except DeltanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
