"""CSV emit/ingest for spectra and statistics, and run manifests.

Numbers are written with 17 significant digits so every double survives a
round trip.  Header lines start with '#'; the first non-comment line of a
table holds the column names.  Newlines are always LF.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .ensembles import EnergySpectrum
from .errors import BundleError, ShapeError
from .significance import PValueReport
from .stats import DeltaSquaredEstimate, PowerSpectrumEstimate, RatioStats
from .theory import TheoryCurve
from .unfolding import UnfoldedSpectrum

SPECTRUM_HEADER = "ensemble,dim,seed,realization"


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write_lines(path, lines):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _read_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def write_table(path, columns: Dict[str, Sequence], comments: Sequence[str] = ()) -> Path:
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ShapeError(f"columns have unequal lengths {sorted(lengths)}")
    lines = [f"# {c}" for c in comments] + [",".join(names)]
    lines += [",".join(fmt(v) for v in row) for row in zip(*cols)]
    return _write_lines(path, lines)


def read_table(path, ints: Sequence[str] = (), strings: Sequence[str] = ()):
    """Returns (comment lines without '# ', {column: ndarray})."""
    comments, rows, names = [], [], None
    for line in _read_lines(path):
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append(line.split(","))
    if names is None:
        raise ShapeError(f"{path}: no column header")
    out = {}
    for j, n in enumerate(names):
        vals = [r[j] for r in rows]
        if n in strings:
            out[n] = np.array(vals, dtype=object)
        elif n in ints:
            out[n] = np.array([int(v) for v in vals], dtype=np.int64)
        else:
            out[n] = np.array([float(v) for v in vals], dtype=float)
    return comments, out


# --------------------------------------------------------------------------
# spectra


def _provenance_fields(prov):
    """(ensemble, dim, seed) from an EnsembleConfig, SpinChainConfig or dict."""
    if prov is None:
        return ("", "", "")
    if isinstance(prov, dict):
        return tuple(prov.get(key, "") for key in ("ensemble", "dim", "seed"))
    if hasattr(prov, "kind"):
        return (prov.kind, prov.dim, prov.master_seed)
    if hasattr(prov, "sites"):
        return (f"SpinChain:L={prov.sites}:omega={fmt(prov.disorder_width)}", "", prov.seed)
    raise ShapeError(f"cannot describe provenance of type {type(prov).__name__}")


def _meta_line(prov, realization):
    return ",".join(fmt(v) for v in _provenance_fields(prov)) + f",{int(realization)}"


def write_spectrum(path, spectrum: EnergySpectrum) -> Path:
    lines = [f"# {SPECTRUM_HEADER}", f"# {_meta_line(spectrum.provenance, spectrum.realization_index)}"]
    lines += [fmt(v) for v in spectrum.levels]
    return _write_lines(path, lines)


def _parse_levels(path):
    comments, values = [], []
    for line in _read_lines(path):
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif line:
            values.append(float(line))
    return comments, np.array(values, dtype=float)


def _parse_provenance(comments):
    if len(comments) < 2 or comments[0] != SPECTRUM_HEADER:
        raise ShapeError(f"missing '# {SPECTRUM_HEADER}' header")
    ens, dim, seed, real = comments[1].split(",")
    prov = {"ensemble": ens, "dim": int(dim) if dim else "", "seed": int(seed) if seed else ""}
    return prov, int(real)


def read_spectrum(path) -> EnergySpectrum:
    comments, levels = _parse_levels(path)
    prov, real = _parse_provenance(comments)
    return EnergySpectrum(levels, real, prov)


def write_unfolded(path, unfolded: UnfoldedSpectrum, provenance, realization: int) -> Path:
    lines = [f"# {SPECTRUM_HEADER}", f"# {_meta_line(provenance, realization)}", f"# method,{unfolded.method}",
             f"# n_ref,{fmt(unfolded.n_ref)}"]
    lines += [fmt(v) for v in unfolded.levels]
    return _write_lines(path, lines)


def read_unfolded(path):
    """Returns (UnfoldedSpectrum, provenance, realization)."""
    comments, levels = _parse_levels(path)
    prov, real = _parse_provenance(comments)
    extra = dict(c.split(",", 1) for c in comments[2:] if "," in c)
    if "method" not in extra:
        raise ShapeError(f"{path}: missing '# method' header")
    n_ref = float(extra.get("n_ref", levels.size))
    return UnfoldedSpectrum(levels, n_ref, extra["method"]), prov, real


# --------------------------------------------------------------------------
# statistics tables


def write_power(path, est: PowerSpectrumEstimate) -> Path:
    k = est.k
    return write_table(path, {"k": k, "omega_k": est.omega, "mean": est.mean, "variance": est.variance,
                              "count": np.full(k.size, est.count, dtype=np.int64)})


def read_power(path) -> PowerSpectrumEstimate:
    _, t = read_table(path, ints=("k", "count"))
    count = int(t["count"][0]) if t["count"].size else 0
    return PowerSpectrumEstimate(int(t["k"].size + 1), t["mean"], t["variance"], count)


def write_delta2(path, est: DeltaSquaredEstimate) -> Path:
    return write_table(path, {"n": est.n, "mean": est.mean, "stderr": est.stderr}, [f"count,{est.count}"])


def read_delta2(path) -> DeltaSquaredEstimate:
    comments, t = read_table(path, ints=("n",))
    meta = dict(c.split(",", 1) for c in comments if "," in c)
    return DeltaSquaredEstimate(t["mean"], t["stderr"], int(meta.get("count", 0)))


def write_ratio_hist(path, stats: RatioStats) -> Path:
    e = stats.hist_edges
    return write_table(path, {"bin_left": e[:-1], "bin_right": e[1:], "density": stats.hist_density},
                       [f"mean_rtilde,{fmt(stats.mean)}", f"stderr,{fmt(stats.stderr)}"])


def read_ratio_hist(path):
    """Returns (edges, density, meta dict with mean_rtilde and stderr)."""
    comments, t = read_table(path)
    meta = {k: float(v) for k, v in (c.split(",", 1) for c in comments if "," in c)}
    edges = np.append(t["bin_left"], t["bin_right"][-1:]) if t["bin_left"].size else np.empty(0)
    return edges, t["density"], meta


def write_theory(path, curve: TheoryCurve) -> Path:
    return write_table(path, {"k": curve.k, "value": curve.values}, [f"family,{curve.family}", f"dim,{curve.dim}"])


def read_theory(path) -> TheoryCurve:
    comments, t = read_table(path, ints=("k",))
    meta = dict(c.split(",", 1) for c in comments if "," in c)
    return TheoryCurve(meta.get("family", ""), int(meta.get("dim", t["k"].size + 1)), t["value"])


def write_report(path, report: PValueReport) -> Path:
    rows = list(report.rows())
    cols = {"k": [r[0] for r in rows], "M": [r[1] for r in rows], "p": [r[2] for r in rows],
            "relerr": [r[3] for r in rows], "verdict": [r[4] for r in rows]}
    return write_table(path, cols, [f"threshold,{fmt(report.threshold)}", f"source_M,{report.source_M}"])


def read_report(path):
    """Returns the report rows as a dict of columns plus the header metadata."""
    comments, t = read_table(path, ints=("k", "M"), strings=("verdict",))
    meta = dict(c.split(",", 1) for c in comments if "," in c)
    return t, meta


SUMMARY_COLUMNS = ("omega", "mean_rtilde", "stderr", "beta", "kc_estimate")


def write_summary(path, points) -> Path:
    cols = {"omega": [p.omega for p in points], "mean_rtilde": [p.mean_rtilde for p in points],
            "stderr": [p.stderr for p in points], "beta": [p.matched_beta for p in points],
            "kc_estimate": [p.kc for p in points]}
    return write_table(path, cols)


def read_summary(path):
    return read_table(path)[1]


def write_samples(path, values, k: int) -> Path:
    """Per-realization P_k samples at one frequency."""
    v = np.asarray(values, dtype=float)
    return write_table(path, {"realization": np.arange(v.size), "value": v}, [f"k,{k}"])


def read_samples(path):
    comments, t = read_table(path, ints=("realization",))
    meta = dict(c.split(",", 1) for c in comments if "," in c)
    return t["value"], int(meta["k"])


# --------------------------------------------------------------------------
# manifests


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class OutputRecord:
    path: str  # relative to the manifest directory
    kind: str
    sha256: str


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: Optional[int]
    code_version: str
    started: str
    finished: str = ""
    outputs: List[OutputRecord] = field(default_factory=list)
    root: str = ""

    def add(self, path, kind: str):
        path = Path(path)
        rel = os.path.relpath(path, self.root) if self.root else str(path)
        self.outputs.append(OutputRecord(rel, kind, sha256_of(path)))

    def path_of(self, kind: str) -> List[Path]:
        return [Path(self.root) / o.path for o in self.outputs if o.kind == kind]

    def find(self, name: str) -> Path:
        for o in self.outputs:
            if Path(o.path).name == name:
                return Path(self.root) / o.path
        raise BundleError(f"manifest has no output named {name!r}")

    def to_dict(self):
        d = asdict(self)
        d.pop("root")
        return d

    def write(self, path=None) -> Path:
        path = Path(path) if path else Path(self.root) / "manifest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def read_manifest(path) -> RunManifest:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    outs = [OutputRecord(**o) for o in d.pop("outputs", [])]
    return RunManifest(outputs=outs, root=str(path.parent), **d)
