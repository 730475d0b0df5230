"""delta_n series, their power spectrum, ensemble moments, ratios and
long-range statistics (number variance, spectral rigidity)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .ensembles import EnergySpectrum, SpacingSequence
from .errors import InvalidParameterError, InvalidWindowError, ShapeError
from .unfolding import UnfoldedSpectrum

# --------------------------------------------------------------------------
# delta_n and its power spectrum


@dataclass
class DeltaSeries:
    values: np.ndarray
    reference_mean: float = 1.0

    def __len__(self):
        return self.values.size


def delta_array(s, reference_mean=1.0):
    return np.cumsum(np.asarray(s, dtype=float) - reference_mean, axis=-1)


def delta_series(seq) -> DeltaSeries:
    """delta_n = sum_{i<=n} (s_i - 1), n = 1..len(s)."""
    s = seq.spacings if isinstance(seq, SpacingSequence) else np.asarray(seq, dtype=float)
    if s.size == 0:
        raise InvalidParameterError("delta series needs at least one spacing")
    values = delta_array(s)
    if isinstance(seq, SpacingSequence) and seq.reunfolded:
        # sum(s~) = count holds exactly in exact arithmetic; drop the roundoff.
        values[-1] = 0.0
    return DeltaSeries(values)


def _as_delta_values(delta):
    return delta.values if isinstance(delta, DeltaSeries) else np.asarray(delta, dtype=float)


def power_spectrum(delta, method: str = "fft") -> np.ndarray:
    """P_k = |N^{-1/2} sum_n delta_n e^{-2 pi i k n / N}|^2 for k = 1..N-1.

    The N available values delta_1..delta_N are indexed n = 0..N-1 in the
    transform.  Works along the last axis of a 2-D batch.
    """
    d = _as_delta_values(delta)
    N = d.shape[-1]
    if N < 2:
        raise InvalidParameterError("power spectrum needs a series of length >= 2")
    if method == "fft":
        P = np.abs(np.fft.fft(d, axis=-1)) ** 2 / N
    elif method == "direct":
        n = np.arange(N)
        W = np.exp(-2j * np.pi * np.outer(n, n) / N)
        P = np.abs(d @ W.T) ** 2 / N
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    return P[..., 1:]


# --------------------------------------------------------------------------
# streaming moments


class RunningMoments:
    """Per-component count/mean/M2 with Chan-Golub-LeVeque merging."""

    def __init__(self, size: int):
        self.size = int(size)
        self.count = 0
        self.mean = np.zeros(self.size)
        self.m2 = np.zeros(self.size)

    def _merge_parts(self, n_b, mean_b, m2_b):
        if n_b == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = n_b, mean_b.copy(), m2_b.copy()
            return
        n = self.count + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (n_b / n)
        self.m2 = self.m2 + m2_b + delta**2 * (self.count * n_b / n)
        self.count = n

    def add(self, rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[-1] != self.size:
            raise ShapeError(f"expected rows of length {self.size}, got {rows.shape[-1]}")
        mean_b = rows.mean(axis=0)
        m2_b = ((rows - mean_b) ** 2).sum(axis=0)
        self._merge_parts(rows.shape[0], mean_b, m2_b)
        return self

    def merge(self, other: "RunningMoments"):
        if other.size != self.size:
            raise ShapeError(f"cannot merge accumulators of sizes {self.size} and {other.size}")
        self._merge_parts(other.count, other.mean, other.m2)
        return self

    @property
    def variance(self):
        if self.count < 2:
            return np.zeros(self.size)
        return self.m2 / (self.count - 1)


@dataclass
class PowerSpectrumEstimate:
    dim: int
    mean: np.ndarray
    variance: np.ndarray
    count: int

    @property
    def k(self):
        return np.arange(1, self.dim)

    @property
    def omega(self):
        return 2.0 * np.pi * self.k / self.dim

    @classmethod
    def from_moments(cls, moments: RunningMoments):
        return cls(moments.size + 1, moments.mean.copy(), moments.variance.copy(), moments.count)


class PowerAccumulator(RunningMoments):
    """Running ensemble moments of P_k for series of length ``dim``."""

    def __init__(self, dim: int):
        super().__init__(dim - 1)
        self.dim = dim

    def add_series(self, delta):
        return self.add(power_spectrum(delta))

    def estimate(self) -> PowerSpectrumEstimate:
        return PowerSpectrumEstimate.from_moments(self)


def accumulate_power(stream: Iterable) -> PowerSpectrumEstimate:
    """Ensemble mean/variance per k from an iterable of per-k power rows."""
    acc = None
    for row in stream:
        row = np.atleast_2d(np.asarray(row, dtype=float))
        if acc is None:
            acc = PowerAccumulator(row.shape[-1] + 1)
        acc.add(row)
    if acc is None:
        raise InvalidParameterError("empty stream")
    return acc.estimate()


@dataclass
class DeltaSquaredEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    count: int

    @property
    def n(self):
        return np.arange(1, self.mean.size + 1)


class DeltaSquaredAccumulator(RunningMoments):
    def add_series(self, delta):
        return self.add(_as_delta_values(delta) ** 2)

    def estimate(self) -> DeltaSquaredEstimate:
        se = np.sqrt(self.variance / max(self.count, 1))
        return DeltaSquaredEstimate(self.mean.copy(), se, self.count)


def delta_squared_average(ensemble: Iterable) -> DeltaSquaredEstimate:
    acc = None
    for d in ensemble:
        v = _as_delta_values(d)
        if acc is None:
            acc = DeltaSquaredAccumulator(v.shape[-1])
        acc.add_series(v)
    if acc is None:
        raise InvalidParameterError("empty ensemble")
    return acc.estimate()


# --------------------------------------------------------------------------
# ratio of consecutive spacings


@dataclass
class RatioStats:
    r: List[np.ndarray]
    rtilde: List[np.ndarray]
    mean: float
    stderr: float
    hist_edges: np.ndarray
    hist_density: np.ndarray
    excluded: int = 0

    @property
    def all_rtilde(self):
        return np.concatenate(self.rtilde) if self.rtilde else np.empty(0)


def ratios_of(levels):
    """(r, r~, n_excluded) for one raw spectrum.  Ratios touching a zero
    spacing are dropped."""
    E = np.asarray(levels, dtype=float)
    if E.size < 3:
        raise InvalidParameterError("ratio statistics need at least 3 levels")
    s = np.diff(E)
    prev, nxt = s[:-1], s[1:]
    ok = (prev > 0) & (nxt > 0)
    r = nxt[ok] / prev[ok]
    rt = np.minimum(r, 1.0 / r)
    return r, rt, int((~ok).sum())


def ratio_stats(spectra, bins: int = 50) -> RatioStats:
    """r~ statistics over an ensemble of RAW spectra (no unfolding)."""
    if isinstance(spectra, (EnergySpectrum, np.ndarray)) and np.ndim(_raw(spectra)) == 1:
        spectra = [spectra]
    rs, rts, excluded = [], [], 0
    for sp in spectra:
        r, rt, ex = ratios_of(_raw(sp))
        rs.append(r)
        rts.append(rt)
        excluded += ex
    return _ratio_summary(rs, rts, excluded, bins)


def _ratio_summary(rs, rts, excluded, bins):
    allrt = np.concatenate(rts) if rts else np.empty(0)
    if allrt.size == 0:
        raise InvalidParameterError("no valid ratios")
    means = np.array([x.mean() for x in rts if x.size])
    if means.size > 1:
        # spread of per-realization means: ratios inside one spectrum are correlated
        stderr = float(means.std(ddof=1) / np.sqrt(means.size))
    else:
        stderr = float(allrt.std(ddof=1) / np.sqrt(allrt.size)) if allrt.size > 1 else 0.0
    density, edges = np.histogram(allrt, bins=bins, range=(0.0, 1.0), density=True)
    return RatioStats(rs, rts, float(allrt.mean()), stderr, edges, density, excluded)


def merge_ratio_stats(parts: Sequence[RatioStats], bins: int = 50) -> RatioStats:
    rs = [x for p in parts for x in p.r]
    rts = [x for p in parts for x in p.rtilde]
    return _ratio_summary(rs, rts, sum(p.excluded for p in parts), bins)


def _raw(sp):
    return sp.levels if isinstance(sp, (EnergySpectrum, UnfoldedSpectrum)) else np.asarray(sp, dtype=float)


# --------------------------------------------------------------------------
# number variance and spectral rigidity


@dataclass
class LongRangeStats:
    L: np.ndarray
    sigma2: Optional[np.ndarray] = None
    delta3: Optional[np.ndarray] = None


def _window_starts(levels, L, inner=0.8):
    lo, hi = levels[0], levels[-1]
    span = hi - lo
    if not 0 < L < span:
        raise InvalidWindowError(f"window length {L} is not inside the spectrum span {span:.6g}")
    margin = 0.5 * (1.0 - inner) * span
    a, b = lo + margin, hi - margin - L
    if b < a:
        raise InvalidWindowError(f"window length {L} does not fit inside the inner {inner:.0%} of the span")
    return np.arange(a, b + 1e-12, L / 4.0)


def _as_level_list(ensemble):
    if isinstance(ensemble, (EnergySpectrum, UnfoldedSpectrum)):
        return [ensemble.levels]
    arr = ensemble
    if isinstance(arr, np.ndarray) and arr.ndim == 1:
        return [arr]
    return [_raw(x) for x in arr]


def number_variance(ensemble, L_grid: Sequence[float]) -> np.ndarray:
    """Sigma^2(L) = <(n(E0, L) - L)^2> over half-open windows [E0, E0+L)
    with stride L/4 in the inner 80% of each unfolded spectrum."""
    levels = _as_level_list(ensemble)
    out = np.empty(len(L_grid))
    for j, L in enumerate(L_grid):
        total, count = 0.0, 0
        for x in levels:
            starts = _window_starts(x, L)
            n = np.searchsorted(x, starts + L, side="left") - np.searchsorted(x, starts, side="left")
            total += np.sum((n - L) ** 2)
            count += starts.size
        out[j] = total / count
    return out


def _delta3_windows(x, starts, L):
    """Exact Delta_3 of the staircase for each window [a, a+L).

    With t_j = x_j - a the in-window levels (j = 1..n):
    int N = sum(L - t_j), int N^2 = sum (2j-1)(L - t_j),
    int t N = sum (L^2 - t_j^2)/2, and Delta_3 is int N^2 minus its
    projection on {1, t - L/2}, divided by L.
    """
    origin = x[0]
    y = x - origin
    g = np.arange(y.size, dtype=float)
    c1 = np.concatenate([[0.0], np.cumsum(y)])
    c2 = np.concatenate([[0.0], np.cumsum(y * y)])
    cg = np.concatenate([[0.0], np.cumsum(g * y)])
    lo = np.searchsorted(x, starts, side="left")
    hi = np.searchsorted(x, starts + L, side="left")
    a = starts - origin
    n = (hi - lo).astype(float)
    s1 = c1[hi] - c1[lo]
    s2 = c2[hi] - c2[lo]
    sg = cg[hi] - cg[lo]
    I1 = n * (L + a) - s1
    # sum (2(g - lo) + 1)(L + a - y_g)
    I2 = (L + a) * n**2 - 2.0 * sg - (1.0 - 2.0 * lo) * s1
    It = 0.5 * (n * (L**2 - a**2) - s2 + 2.0 * a * s1)
    Ic = It - 0.5 * L * I1
    return (I2 - I1**2 / L - Ic**2 / (L**3 / 12.0)) / L


def spectral_rigidity(ensemble, L_grid: Sequence[float]) -> np.ndarray:
    """Delta_3(L): least-squares deviation of the staircase from the best
    straight line, averaged over windows (stride L/4, inner 80%)."""
    levels = _as_level_list(ensemble)
    out = np.empty(len(L_grid))
    for j, L in enumerate(L_grid):
        vals = [_delta3_windows(x, _window_starts(x, L), L) for x in levels]
        out[j] = np.concatenate(vals).mean()
    return out


def long_range_stats(ensemble, L_grid) -> LongRangeStats:
    L_grid = np.asarray(L_grid, dtype=float)
    return LongRangeStats(L_grid, number_variance(ensemble, L_grid), spectral_rigidity(ensemble, L_grid))
