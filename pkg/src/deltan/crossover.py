"""Spin-chain disorder sweep, beta calibration from <r~>, and the comparison
of the chain with the matched Gaussian beta-ensemble.

For each disorder width omega the chain spectra go through: central window
-> trim -> polynomial unfolding -> trim -> spacings -> delta_n -> P_k, while
<r~> is taken on the raw central levels.  The beta-ensemble with the same
<r~> is then simulated with the same level count and realization count and
pushed through the identical pipeline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import chi2_contingency

from ._rng import derive_rng
from .ensembles import sample_beta_ensemble
from .errors import CalibrationError, ClampWarning, InvalidParameterError, ShapeError, StageError
from .parallel import chunk_ranges, map_ordered
from .spinchain import SpinChainConfig, build_basis, realize_chain, window_bounds
from .stats import (
    PowerAccumulator,
    PowerSpectrumEstimate,
    RatioStats,
    delta_array,
    merge_ratio_stats,
    power_spectrum,
    ratio_stats,
    ratios_of,
)
from .unfolding import spacings_array, trim_edges, unfold_polynomial

SWEEP_OMEGAS = (0.4, 0.6, 0.8, 1.0, 1.4, 2.0, 3.0, 4.0, 5.0, 7.0)
DEFAULT_BETA_GRID = (0.0, 0.025, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.2)


@dataclass(frozen=True)
class StatsPlan:
    fraction: float = 1.0 / 3.0
    trim: int = 8
    degree: int = 6
    realizations: int = 200
    lam: float = 1.0
    beta_grid: tuple = DEFAULT_BETA_GRID
    calibration_realizations: int = 100
    chunk: int = 50
    ratio_bins: int = 25


def polynomial_delta(levels, trim: int, degree: int) -> np.ndarray:
    """trim -> polynomial unfold -> trim -> spacings -> delta_n for one spectrum."""
    x = trim_edges(np.asarray(levels, dtype=float), trim) if trim else np.asarray(levels, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eps = unfold_polynomial(x, degree).levels
    if trim:
        eps = trim_edges(eps, trim)
    return delta_array(spacings_array(eps))


def _pipeline_chunk(spectra, plan):
    deltas = np.vstack([polynomial_delta(E, plan.trim, plan.degree) for E in spectra])
    acc = PowerAccumulator(deltas.shape[-1]).add(power_spectrum(deltas))
    return acc, ratio_stats(spectra, bins=plan.ratio_bins)


def _chain_chunk(config, plan, start, stop):
    basis = build_basis(config.sites, config.sz_sector)
    lo, hi = window_bounds(basis.dimension, plan.fraction)
    spectra = [realize_chain(config, r, basis).levels[lo:hi] for r in range(start, stop)]
    return _pipeline_chunk(spectra, plan)


def _beta_chunk(n, beta, plan, seed, tag, start, stop):
    spectra = [sample_beta_ensemble(n, beta, plan.lam, derive_rng(seed, tag, r)).levels for r in range(start, stop)]
    return _pipeline_chunk(spectra, plan)


def _run_chunks(func, args, total, chunk, workers):
    tasks = [args + (a, b) for a, b in chunk_ranges(total, chunk)]
    parts = map_ordered(func, tasks, workers)
    acc = parts[0][0]
    for p in parts[1:]:
        acc.merge(p[0])
    return acc.estimate(), merge_ratio_stats([p[1] for p in parts], bins=parts[0][1].hist_density.size)


# --------------------------------------------------------------------------
# beta calibration


@dataclass
class BetaCalibration:
    betas: np.ndarray
    rtilde: np.ndarray
    stderr: np.ndarray
    n: int
    realizations: int
    rule: str = "pchip"

    def __post_init__(self):
        if np.any(np.diff(self.rtilde) <= 0):
            raise CalibrationError(
                "measured <r~> is not strictly increasing in beta",
                {"betas": self.betas.tolist(), "rtilde": self.rtilde.tolist(), "stderr": self.stderr.tolist()},
            )
        self._forward = PchipInterpolator(self.betas, self.rtilde)
        self._inverse = PchipInterpolator(self.rtilde, self.betas)

    def rtilde_of(self, beta):
        return self._forward(beta)

    def beta_of(self, rtilde):
        return self._inverse(rtilde)


def calibrate_beta(beta_grid: Sequence[float], n: int, M: int, seed: int, lam: float = 1.0,
                   workers=None) -> BetaCalibration:
    """Monte Carlo <r~>(beta) on ``beta_grid`` with M spectra of n levels each."""
    grid = np.asarray(beta_grid, dtype=float)
    if np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise InvalidParameterError("beta grid must be ascending and nonnegative")
    tasks = [(n, float(b), lam, seed, M) for b in grid]
    measured = map_ordered(_calibration_point, tasks, workers)
    r = np.array([m[0] for m in measured])
    se = np.array([m[1] for m in measured])
    return BetaCalibration(grid, r, se, n, M)


def _calibration_point(n, beta, lam, seed, M):
    means = np.empty(M)
    for r in range(M):
        E = sample_beta_ensemble(n, beta, lam, derive_rng(seed, f"calibration:{beta!r}", r)).levels
        means[r] = ratios_of(E)[1].mean()
    return float(means.mean()), float(means.std(ddof=1) / np.sqrt(M))


def match_beta(calibration: BetaCalibration, rtilde: float) -> float:
    lo, hi = calibration.rtilde[0], calibration.rtilde[-1]
    if not lo <= rtilde <= hi:
        warnings.warn(f"<r~> = {rtilde:.5f} outside calibrated range [{lo:.5f}, {hi:.5f}]; clamped", ClampWarning, stacklevel=2)
        rtilde = min(max(rtilde, lo), hi)
    return float(calibration.beta_of(rtilde))


# --------------------------------------------------------------------------
# comparisons


@dataclass
class PowerComparison:
    k: np.ndarray
    ratio: np.ndarray
    log_distance: np.ndarray
    low_decile: float
    high_half: float


def compare_power(system_ps: PowerSpectrumEstimate, beta_ps: PowerSpectrumEstimate) -> PowerComparison:
    """Per-k ratio and |log10 ratio|; summaries over k <= N/10 and N/4 <= k <= N/2."""
    if system_ps.dim != beta_ps.dim:
        raise ShapeError(f"power spectra have dims {system_ps.dim} and {beta_ps.dim}")
    N = system_ps.dim
    k = system_ps.k
    ratio = system_ps.mean / beta_ps.mean
    dist = np.abs(np.log10(ratio))
    low = dist[k <= N / 10]
    high = dist[(k >= N / 4) & (k <= N / 2)]
    return PowerComparison(k, ratio, dist, float(low.mean()), float(high.mean()))


def compare_ratio_histograms(a: RatioStats, b: RatioStats, bins: int = 25) -> float:
    """Chi-square homogeneity p-value of the two r~ samples on ``bins`` bins of [0, 1]."""
    ca, _ = np.histogram(a.all_rtilde, bins=bins, range=(0.0, 1.0))
    cb, _ = np.histogram(b.all_rtilde, bins=bins, range=(0.0, 1.0))
    keep = (ca + cb) > 0
    return float(chi2_contingency(np.vstack([ca[keep], cb[keep]]))[1])


def log_slope(k, values):
    k, values = np.asarray(k, float), np.asarray(values, float)
    return float(np.polyfit(np.log10(k), np.log10(values), 1)[0])


def estimate_kc(power: PowerSpectrumEstimate, window: int = 9, kmax_fraction: float = 0.25):
    """Crossover frequency between 1/k^2 (low k) and 1/k behaviour.

    Local log-log slopes come from a ``window``-point moving fit; k_c is where
    the slope first rises through -1.5 after having been below it.  Returns
    (k_c, uncertainty) or (nan, nan) when no such crossing exists.
    """
    k = power.k
    kmax = int(power.dim * kmax_fraction)
    logk, logp = np.log10(k[:kmax]), np.log10(power.mean[:kmax])
    half = window // 2
    centers, slopes = [], []
    for c in range(half, kmax - half):
        sl = slice(c - half, c + half + 1)
        slopes.append(np.polyfit(logk[sl], logp[sl], 1)[0])
        centers.append(k[c])
    slopes, centers = np.array(slopes), np.array(centers)
    below = slopes < -1.5
    if not below.any():
        return float("nan"), float("nan")
    first_below = np.argmax(below)
    after = np.nonzero(~below[first_below:])[0]
    if after.size == 0:
        return float("nan"), float("nan")
    j = first_below + after[0]
    s0, s1 = slopes[j - 1], slopes[j]
    c0, c1 = np.log10(centers[j - 1]), np.log10(centers[j])
    kc = 10 ** (c0 + (-1.5 - s0) * (c1 - c0) / (s1 - s0))
    err = 0.5 * window  # moving-fit resolution in k around the crossing
    return float(kc), float(err)


# --------------------------------------------------------------------------
# the sweep


@dataclass
class CrossoverPoint:
    omega: float
    mean_rtilde: float
    stderr: float
    matched_beta: float
    power: PowerSpectrumEstimate
    beta_power: Optional[PowerSpectrumEstimate]
    ratios: RatioStats = field(repr=False)
    beta_ratios: Optional[RatioStats] = field(default=None, repr=False)
    kc: float = float("nan")
    kc_err: float = float("nan")
    n_levels: int = 0


def chain_point(config: SpinChainConfig, plan: StatsPlan, workers=None):
    """Power spectrum estimate and ratio statistics of one disorder width."""
    return _run_chunks(_chain_chunk, (config, plan), plan.realizations, plan.chunk, workers)


def beta_point(n: int, beta: float, plan: StatsPlan, seed: int, tag: str, workers=None):
    return _run_chunks(_beta_chunk, (n, beta, plan, seed, tag), plan.realizations, plan.chunk, workers)


def crossover_sweep(chain_config: SpinChainConfig, omegas: Sequence[float], plan: StatsPlan = StatsPlan(),
                    calibration: Optional[BetaCalibration] = None, matched: bool = True,
                    workers=None) -> List[CrossoverPoint]:
    d = build_basis(chain_config.sites, chain_config.sz_sector).dimension
    lo, hi = window_bounds(d, plan.fraction)
    n_window = hi - lo
    if matched and calibration is None:
        try:
            calibration = calibrate_beta(plan.beta_grid, n_window, plan.calibration_realizations,
                                         chain_config.seed, plan.lam, workers)
        except Exception as exc:
            raise StageError("calibration", exc) from exc
    points = []
    for omega in omegas:
        try:
            cfg = replace(chain_config, disorder_width=float(omega))
            power, ratios = chain_point(cfg, plan, workers)
            kc, kc_err = estimate_kc(power)
            point = CrossoverPoint(float(omega), ratios.mean, ratios.stderr, float("nan"), power, None,
                                   ratios, kc=kc, kc_err=kc_err, n_levels=n_window)
            if matched:
                with warnings.catch_warnings():
                    warnings.simplefilter("always", ClampWarning)
                    point.matched_beta = match_beta(calibration, ratios.mean)
                point.beta_power, point.beta_ratios = beta_point(
                    n_window, point.matched_beta, plan, chain_config.seed, f"matched:{float(omega)!r}", workers)
        except Exception as exc:
            raise StageError(f"omega={omega}", exc) from exc
        points.append(point)
    return points
