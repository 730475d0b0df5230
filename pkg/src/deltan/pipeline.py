"""Config-driven runs, manifests, plot bundles and manifest verification.

A run config is a plain ``key = value`` file (``#`` comments allowed, no
sections, no includes).  Every config carries ``schema_version``, ``recipe``
and ``seed``; the remaining keys depend on the recipe:

``gde``        processes I and II of the Gaussian diagonal ensemble
``goe``        GOE power spectrum, P_k samples, ratios and the p-value report
``crossover``  spin-chain disorder sweep with matched beta-ensembles

Chunk sizes are part of the config and never depend on the worker count, so
the statistics CSVs of a run are reproducible byte for byte.
"""

from __future__ import annotations

import configparser
import json
import os
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from . import io as dio
from .crossover import DEFAULT_BETA_GRID, StatsPlan, calibrate_beta, crossover_sweep
from .errors import BundleError, ConfigError, StageError
from .experiments import gde_process_one, gde_process_two, goe_power_run
from .significance import estimate_reference, p_curve
from .spinchain import SpinChainConfig, build_basis, window_bounds
from .stats import merge_ratio_stats
from .theory import delta_squared_theory, goe_power, ratio_constants, theory_curve

SCHEMA_VERSION = 1
STAT_KINDS = ("power", "delta2", "ratio", "theory", "report", "summary", "samples", "calibration")


def _int(v):
    return int(v)


def _float(v):
    return float(v)


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v):
    return tuple(float(x) for x in str(v).split(",") if x.strip())


def _ints(v):
    return tuple(int(x) for x in str(v).split(",") if x.strip())


def _choice(*options):
    def parse(v):
        if v not in options:
            raise ValueError(f"expected one of {options}, got {v!r}")
        return v
    return parse


# key -> (parser, default); default None means required
COMMON = {"schema_version": (_int, None), "recipe": (str, None), "seed": (_int, None)}
SCHEMAS = {
    "gde": {
        "dim": (_int, 1000),
        "realizations": (_int, 20000),
        "blocks": (_int, 10000),
        "reunfold": (_bool, False),
        "chunk": (_int, 250),
    },
    "goe": {
        "dim": (_int, 1000),
        "realizations": (_int, 200),
        "trim": (_int, 1),
        "method": (_choice("dense", "tridiagonal"), "tridiagonal"),
        "collect_k": (_int, 0),  # 0: k = round(2 N_s / 5)
        "M_list": (_ints, (10, 30, 100, 300, 1000, 3000, 10000, 30000)),
        "alpha": (_float, 0.05),
        "ratio_bins": (_int, 50),
        "chunk": (_int, 250),
    },
    "crossover": {
        "sites": (_int, 12),
        "omegas": (_floats, (0.4, 0.6, 0.8, 1.0, 1.4, 2.0, 3.0, 4.0, 5.0, 7.0)),
        "realizations": (_int, 200),
        "fraction": (_float, 1.0 / 3.0),
        "trim": (_int, 8),
        "degree": (_int, 6),
        "matched": (_bool, True),
        "lam": (_float, 1.0),
        "beta_grid": (_floats, DEFAULT_BETA_GRID),
        "calibration_realizations": (_int, 100),
        "ratio_bins": (_int, 25),
        "chunk": (_int, 50),
    },
}
# figure recipes map onto the three run recipes
RECIPE_ALIASES = {"fig1": "gde", "fig2": "gde", "fig3": "goe", "fig4": "goe", "fig5": "goe",
                  "fig6": "crossover", "fig7": "crossover", "fig8": "crossover"}


def parse_config_text(text: str, path: Optional[str] = None) -> dict:
    raw = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    raw.optionxform = str
    try:
        raw.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}", path) from exc
    return validate_config(dict(raw["run"]), path)


def load_config(path) -> dict:
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path) from exc
    return parse_config_text(text, path)


def validate_config(values: dict, path: Optional[str] = None) -> dict:
    """Schema check and defaults.  Accepts raw strings or already-typed values."""
    if not values:
        raise ConfigError("empty config", path)
    missing = [k for k in COMMON if k not in values]
    if missing:
        raise ConfigError(f"missing required keys {missing}", path)
    recipe = RECIPE_ALIASES.get(str(values["recipe"]), str(values["recipe"]))
    if recipe not in SCHEMAS:
        raise ConfigError(f"unknown recipe {values['recipe']!r}; expected one of {sorted(SCHEMAS)}", path)
    schema = dict(COMMON, **SCHEMAS[recipe])
    unknown = sorted(set(values) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys for recipe {recipe!r}: {unknown}", path)
    out = {}
    for key, (parse, default) in schema.items():
        if key in values:
            v = values[key]
            if isinstance(v, list):
                v = tuple(v)
            try:
                out[key] = v if (not isinstance(v, str) and parse is not str) else parse(v)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", path) from exc
        elif default is None:
            raise ConfigError(f"missing required key {key!r}", path)
        else:
            out[key] = default
    out["recipe"] = recipe
    if out["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"schema_version {out['schema_version']} is not supported (expected {SCHEMA_VERSION})", path)
    if out["seed"] < 0:
        raise ConfigError("seed must be non-negative", path)
    return out


def config_to_text(config: dict) -> str:
    lines = []
    for key, value in config.items():
        if isinstance(value, (tuple, list)):
            value = ",".join(dio.fmt(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        else:
            value = dio.fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _jsonable(config):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in config.items()}


def _now():
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


# --------------------------------------------------------------------------
# recipes


def _stage(name, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _delta2_theory_table(path, n, N, corrected):
    return dio.write_table(path, {"n": n, "value": delta_squared_theory(n, N, corrected)},
                           [f"family,{'delta2-corrected' if corrected else 'delta2-linear'}", f"dim,{N}"])


def _run_gde(cfg, out: Path, manifest, workers):
    n, seed = cfg["dim"], cfg["seed"]
    one = _stage("process1", gde_process_one, n, cfg["blocks"], seed)
    two = _stage("process2", gde_process_two, n, cfg["realizations"], seed, reunfold=cfg["reunfold"],
                 workers=workers, chunk=cfg["chunk"])
    for tag, run in (("process1", one), ("process2", two)):
        manifest.add(dio.write_delta2(out / f"delta2_{tag}.csv", run.delta2), "delta2")
        manifest.add(dio.write_power(out / f"power_{tag}.csv", run.power), "power")
    N = two.power.dim
    manifest.add(_delta2_theory_table(out / "theory_delta2_process1.csv", one.delta2.n, one.power.dim, False), "theory")
    # the parabola is set by the level count n = dim, not the spacing count
    manifest.add(_delta2_theory_table(out / "theory_delta2_process2.csv", two.delta2.n, n, True), "theory")
    manifest.add(dio.write_theory(out / "theory_gde.csv", theory_curve("gde", N)), "theory")
    manifest.add(dio.write_theory(out / "theory_gde_corrected.csv", theory_curve("gde-corrected", N)), "theory")


def _run_goe(cfg, out: Path, manifest, workers):
    n, trim = cfg["dim"], cfg["trim"]
    N = n - 2 * trim - 1
    collect_k = cfg["collect_k"] or int(round(2 * N / 5))
    run = _stage("goe", goe_power_run, n, cfg["realizations"], cfg["seed"], trim=trim, method=cfg["method"],
                 collect_k=collect_k, workers=workers, chunk=cfg["chunk"], ratios=True)
    manifest.add(dio.write_power(out / "power_goe.csv", run.power), "power")
    manifest.add(dio.write_theory(out / "theory_goe.csv", theory_curve("goe", run.power.dim)), "theory")
    manifest.add(dio.write_samples(out / f"samples_k{collect_k}.csv", run.samples, collect_k), "samples")
    ratios = run.ratios
    if ratios.hist_density.size != cfg["ratio_bins"]:
        ratios = merge_ratio_stats([ratios], bins=cfg["ratio_bins"])
    manifest.add(dio.write_ratio_hist(out / "ratio_goe.csv", ratios), "ratio")
    if run.power.count >= 1000:
        ref = estimate_reference(run.power)
        report = _stage("ptest", p_curve, ref, goe_power(ref.k, run.power.dim), cfg["M_list"], cfg["alpha"])
        manifest.add(dio.write_report(out / "report_goe.csv", report), "report")


def _omega_tag(omega):
    return dio.fmt(float(omega)).replace("-", "m")


def write_calibration(path, cal):
    return dio.write_table(path, {"beta": cal.betas, "mean_rtilde": cal.rtilde, "stderr": cal.stderr},
                           [f"levels,{cal.n}", f"realizations,{cal.realizations}", f"rule,{cal.rule}"])


def _run_crossover(cfg, out: Path, manifest, workers):
    chain = SpinChainConfig(cfg["sites"], 0.0, seed=cfg["seed"])
    plan = StatsPlan(fraction=cfg["fraction"], trim=cfg["trim"], degree=cfg["degree"],
                     realizations=cfg["realizations"], lam=cfg["lam"], beta_grid=tuple(cfg["beta_grid"]),
                     calibration_realizations=cfg["calibration_realizations"], chunk=cfg["chunk"],
                     ratio_bins=cfg["ratio_bins"])
    calibration = None
    if cfg["matched"]:
        lo, hi = window_bounds(build_basis(chain.sites, chain.sz_sector).dimension, plan.fraction)
        calibration = _stage("calibration", calibrate_beta, plan.beta_grid, hi - lo,
                             plan.calibration_realizations, cfg["seed"], plan.lam, workers)
        manifest.add(write_calibration(out / "calibration.csv", calibration), "calibration")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        points = crossover_sweep(chain, cfg["omegas"], plan, calibration, cfg["matched"], workers)
    for p in points:
        tag = _omega_tag(p.omega)
        manifest.add(dio.write_power(out / f"power_omega{tag}.csv", p.power), "power")
        manifest.add(dio.write_ratio_hist(out / f"ratio_omega{tag}.csv", p.ratios), "ratio")
        if p.beta_power is not None:
            manifest.add(dio.write_power(out / f"power_beta_omega{tag}.csv", p.beta_power), "power")
            manifest.add(dio.write_ratio_hist(out / f"ratio_beta_omega{tag}.csv", p.beta_ratios), "ratio")
    N = points[0].power.dim
    for fam in ("goe", "gde-corrected", "gde"):
        manifest.add(dio.write_theory(out / f"theory_{fam.replace('-', '_')}.csv", theory_curve(fam, N)), "theory")
    manifest.add(dio.write_summary(out / "summary.csv", points), "summary")


RECIPES: Dict[str, Callable] = {"gde": _run_gde, "goe": _run_goe, "crossover": _run_crossover}


def run_pipeline(config, out_dir, workers=None, command: str = "run") -> dio.RunManifest:
    """Run the recipe of ``config`` (a dict or a config-file path) into ``out_dir``."""
    cfg = load_config(config) if isinstance(config, (str, Path)) else validate_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = dio.RunManifest(command, _jsonable(cfg), cfg["seed"], __version__, _now(), root=str(out))
    (out / "config.txt").write_text(config_to_text(cfg), encoding="utf-8", newline="\n")
    RECIPES[cfg["recipe"]](cfg, out, manifest, workers)
    manifest.finished = _now()
    manifest.write()
    return manifest


# --------------------------------------------------------------------------
# verification


@dataclass
class VerifyResult:
    compared: Dict[str, bool]
    missing: List[str] = field(default_factory=list)

    @property
    def ok(self):
        return bool(self.compared) and all(self.compared.values()) and not self.missing


def verify_manifest(manifest_path, workers=None, work_dir=None) -> VerifyResult:
    """Re-run the manifest's config and compare digests of every statistics CSV."""
    original = dio.read_manifest(manifest_path)
    cfg = validate_config(original.config)
    with tempfile.TemporaryDirectory(dir=work_dir) as tmp:
        fresh = run_pipeline(cfg, tmp, workers, command=f"verify:{original.command}")
        digests = {o.path: o.sha256 for o in fresh.outputs}
    compared, missing = {}, []
    for o in original.outputs:
        if o.kind not in STAT_KINDS:
            continue
        if o.path not in digests:
            missing.append(o.path)
        else:
            compared[o.path] = digests[o.path] == o.sha256
    return VerifyResult(compared, missing)


# --------------------------------------------------------------------------
# plot bundles


@dataclass
class Series:
    name: str
    csv: str
    x: str
    y: str
    style: str = "line"  # line | points | step
    theory: bool = False


@dataclass
class PlotBundle:
    tag: str
    title: str
    series: List[Series]
    logx: bool = False
    logy: bool = False
    hlines: Dict[str, float] = field(default_factory=dict)
    xlabel: str = ""
    ylabel: str = ""

    def to_dict(self):
        return {"tag": self.tag, "title": self.title, "logx": self.logx, "logy": self.logy,
                "xlabel": self.xlabel, "ylabel": self.ylabel, "hlines": self.hlines,
                "series": [vars(s) for s in self.series]}


FIGURE_TAGS = tuple(f"fig{i}" for i in range(1, 9))


def _need(manifest, name):
    path = manifest.find(name)
    if not path.exists():
        raise BundleError(f"series file {path} listed in the manifest is missing")
    return path


def _rel(path, out):
    return os.path.relpath(path, out)


def _bundle_fig1(m, out):
    s = []
    for tag in ("process1", "process2"):
        s.append(Series(f"<delta_n^2> {tag}", _rel(_need(m, f"delta2_{tag}.csv"), out), "n", "mean", "points"))
        s.append(Series(f"theory {tag}", _rel(_need(m, f"theory_delta2_{tag}.csv"), out), "n", "value", theory=True))
    return PlotBundle("fig1", "<delta_n^2> for processes I and II", s, xlabel="n", ylabel="<delta_n^2>")


def _bundle_fig2(m, out):
    s = [Series("P_k process1", _rel(_need(m, "power_process1.csv"), out), "k", "mean", "points"),
         Series("P_k process2", _rel(_need(m, "power_process2.csv"), out), "k", "mean", "points"),
         Series("1/(2 sin^2)", _rel(_need(m, "theory_gde.csv"), out), "k", "value", theory=True),
         Series("1/(4 sin^2)", _rel(_need(m, "theory_gde_corrected.csv"), out), "k", "value", theory=True)]
    return PlotBundle("fig2", "GDE power spectrum, processes I and II", s, True, True, xlabel="k", ylabel="<P_k>")


def _bundle_fig3(m, out):
    if "power_goe.csv" in {Path(o.path).name for o in m.outputs}:
        s = [Series("GOE P_k", _rel(_need(m, "power_goe.csv"), out), "k", "mean", "points"),
             Series("GOE theory", _rel(_need(m, "theory_goe.csv"), out), "k", "value", theory=True)]
    else:
        s = [Series(f"omega={o.path[len('power_omega'):-4]}", _rel(_need(m, Path(o.path).name), out), "k", "mean", "points")
             for o in m.outputs if Path(o.path).name.startswith("power_omega")]
        if not s:
            raise BundleError("manifest has no power spectra for fig3")
        s.append(Series("GOE theory", _rel(_need(m, "theory_goe.csv"), out), "k", "value", theory=True))
        s.append(Series("1/(4 sin^2)", _rel(_need(m, "theory_gde_corrected.csv"), out), "k", "value", theory=True))
    return PlotBundle("fig3", "power spectrum with theory overlays", s, True, True, xlabel="k", ylabel="<P_k>")


def _bundle_fig4(m, out):
    report = _need(m, "report_goe.csv")
    rows, _ = dio.read_report(report)
    k = rows["k"]
    picks = sorted({int(k.min()), int(np.median(k)), int(k.max())})
    s = []
    for kk in picks:
        sel = k == kk
        path = out / f"fig4_p_k{kk}.csv"
        dio.write_table(path, {"M": rows["M"][sel], "p": rows["p"][sel]}, [f"k,{kk}"])
        s.append(Series(f"p(k={kk}; M)", _rel(path, out), "M", "p", "points"))
    return PlotBundle("fig4", "p-value of the GOE theory vs. ensemble size", s, True, True,
                      hlines={"threshold": 0.05}, xlabel="M", ylabel="p")


def _bundle_fig5(m, out):
    names = [Path(o.path).name for o in m.outputs if o.kind == "samples"]
    if not names:
        raise BundleError("manifest has no P_k samples for fig5")
    values, k = dio.read_samples(_need(m, names[0]))
    density, edges = np.histogram(values, bins=60, density=True)
    hist = out / f"fig5_hist_k{k}.csv"
    dio.write_table(hist, {"bin_left": edges[:-1], "bin_right": edges[1:], "density": density}, [f"k,{k}"])
    x = 0.5 * (edges[:-1] + edges[1:])
    mean = values.mean()
    fit = out / f"fig5_exponential_k{k}.csv"
    dio.write_table(fit, {"x": x, "value": np.exp(-x / mean) / mean}, [f"mean,{dio.fmt(mean)}"])
    s = [Series(f"P_{k} histogram", _rel(hist, out), "bin_left", "density", "step"),
         Series("exponential fit", _rel(fit, out), "x", "value", theory=True)]
    return PlotBundle("fig5", f"distribution of P_{k}", s, False, True, xlabel=f"P_{k}", ylabel="density")


def _bundle_fig6(m, out):
    b = _bundle_fig3(m, out)
    b.tag, b.title = "fig6", "spin-chain power spectra across disorder"
    return b


def _bundle_fig7(m, out):
    c = ratio_constants()
    s = [Series("<r~>", _rel(_need(m, "summary.csv"), out), "omega", "mean_rtilde", "points")]
    hl = {"poisson": round(c["poisson"], 5), "goe_surmise": round(c["goe_surmise"], 5), "goe_large_n": c["goe_large_n"]}
    return PlotBundle("fig7", "<r~> across disorder", s, hlines=hl, xlabel="omega", ylabel="<r~>")


def _bundle_fig8(m, out):
    s = []
    for o in m.outputs:
        name = Path(o.path).name
        if name.startswith("power_beta_omega"):
            tag = name[len("power_beta_omega"):-4]
            s.append(Series(f"chain omega={tag}", _rel(_need(m, f"power_omega{tag}.csv"), out), "k", "mean", "points"))
            s.append(Series(f"beta-ensemble omega={tag}", _rel(_need(m, name), out), "k", "mean"))
    if not s:
        raise BundleError("manifest has no matched beta-ensemble spectra for fig8")
    return PlotBundle("fig8", "spin chain vs. matched beta-ensemble", s, True, True, xlabel="k", ylabel="<P_k>")


BUNDLERS = {"fig1": _bundle_fig1, "fig2": _bundle_fig2, "fig3": _bundle_fig3, "fig4": _bundle_fig4,
            "fig5": _bundle_fig5, "fig6": _bundle_fig6, "fig7": _bundle_fig7, "fig8": _bundle_fig8}

SCRIPT_TEMPLATE = '''"""Plot stub for {tag}.  Needs matplotlib; reads bundle.json next to it."""
import json
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).parent


def read_csv(path):
    rows = [line for line in open(path) if not line.startswith("#")]
    names = rows[0].strip().split(",")
    values = np.loadtxt(rows[1:], delimiter=",", ndmin=2)
    return {{n: values[:, j] for j, n in enumerate(names)}}


bundle = json.loads((here / "{tag}_bundle.json").read_text())
fig, ax = plt.subplots()
for s in bundle["series"]:
    data = read_csv(here / s["csv"])
    kw = dict(label=s["name"])
    if s["style"] == "points":
        ax.plot(data[s["x"]], data[s["y"]], ".", ms=3, **kw)
    elif s["style"] == "step":
        ax.step(data[s["x"]], data[s["y"]], where="post", **kw)
    else:
        ax.plot(data[s["x"]], data[s["y"]], "--" if s["theory"] else "-", **kw)
for name, y in bundle["hlines"].items():
    ax.axhline(y, ls=":", lw=1, label=name)
if bundle["logx"]:
    ax.set_xscale("log")
if bundle["logy"]:
    ax.set_yscale("log")
ax.set_xlabel(bundle["xlabel"])
ax.set_ylabel(bundle["ylabel"])
ax.set_title(bundle["title"])
ax.legend(fontsize=7)
fig.savefig(here / "{tag}.png", dpi=150)
'''


def emit_plot_bundle(manifest, tag: str, out_dir=None) -> PlotBundle:
    """Write ``<tag>_bundle.json`` and ``plot_<tag>.py`` next to the manifest's outputs."""
    if tag not in BUNDLERS:
        raise BundleError(f"unknown figure tag {tag!r}; expected one of {FIGURE_TAGS}")
    m = dio.read_manifest(manifest) if isinstance(manifest, (str, Path)) else manifest
    out = Path(out_dir) if out_dir else Path(m.root)
    out.mkdir(parents=True, exist_ok=True)
    bundle = BUNDLERS[tag](m, out)
    for s in bundle.series:
        if not (out / s.csv).exists():
            raise BundleError(f"series {s.name!r} references missing file {s.csv}")
    with open(out / f"{tag}_bundle.json", "w", newline="\n", encoding="utf-8") as fh:
        json.dump(bundle.to_dict(), fh, indent=2)
        fh.write("\n")
    (out / f"plot_{tag}.py").write_text(SCRIPT_TEMPLATE.format(tag=tag), encoding="utf-8", newline="\n")
    return bundle
