"""Per-frequency significance test of a theoretical power spectrum.

The mean of M realizations of P_k is, by the central limit theorem,
Normal(mu, sigma / sqrt(M)), where mu and sigma come from a large reference
ensemble.  The p-value of a theoretical value T_k is the one-sided tail of
that normal beyond T_k, on the side where T_k lies.  A two-sided variant
would double it; the one-sided form is kept as the test definition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as _sps
from scipy.special import erfc

from .errors import DegenerateReferenceWarning, DomainError, SampleSizeError, ShapeError
from .stats import PowerSpectrumEstimate

MIN_REFERENCE_SAMPLES = 1000


@dataclass
class ReferenceMoments:
    mu: np.ndarray
    sigma: np.ndarray
    source_M: int

    @property
    def dim(self):
        return self.mu.size + 1

    @property
    def k(self):
        return np.arange(1, self.dim)


def estimate_reference(samples, min_samples: int = MIN_REFERENCE_SAMPLES) -> ReferenceMoments:
    """Sample mean and standard deviation per k.

    ``samples`` is an (M, N-1) array of per-realization P_k, or a
    :class:`PowerSpectrumEstimate` already holding the running moments.
    """
    if isinstance(samples, PowerSpectrumEstimate):
        M = samples.count
        mu, sigma = samples.mean, np.sqrt(samples.variance)
    else:
        x = np.asarray(samples, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        M = x.shape[0]
        mu = x.mean(axis=0)
        sigma = x.std(axis=0, ddof=1) if M > 1 else np.zeros(x.shape[1])
    if M < min_samples:
        raise SampleSizeError(f"reference needs at least {min_samples} samples per k, got {M}")
    return ReferenceMoments(np.asarray(mu, float), np.asarray(sigma, float), int(M))


def normal_tail(z):
    """Upper tail 1 - Phi(z) = erfc(z / sqrt 2) / 2 (accurate deep in the tail)."""
    return 0.5 * erfc(np.asarray(z, dtype=float) / np.sqrt(2.0))


def _p_values(T, mu, sigma, M):
    T, mu, sigma = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (T, mu, sigma)))
    degenerate = sigma == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(T - mu) / (sigma / np.sqrt(M))
    p = normal_tail(z)
    p = np.where(degenerate, np.where(T == mu, 1.0, 0.0), p)
    return p, degenerate


def p_value(T, mu, sigma, M):
    """One-sided CLT p-value of theoretical value ``T`` for the M-average."""
    if M < 1:
        raise DomainError("M must be >= 1")
    if np.any(np.asarray(sigma) < 0):
        raise DomainError("sigma must be >= 0")
    p, degenerate = _p_values(T, mu, sigma, M)
    if np.any(degenerate):
        warnings.warn("zero reference spread: p-value is 1 at the mean and 0 elsewhere", DegenerateReferenceWarning, stacklevel=2)
    return float(p) if p.ndim == 0 else p


@dataclass
class PValueReport:
    k: np.ndarray
    M_list: np.ndarray
    p: np.ndarray  # shape (len(M_list), len(k))
    relerr: np.ndarray
    threshold: float
    source_M: int
    degenerate: np.ndarray

    @property
    def verdict(self):
        return self.p >= self.threshold

    def pass_fraction(self):
        return self.verdict.mean(axis=1)

    def first_failing_M(self):
        for M, ok in zip(self.M_list, self.verdict):
            if not ok.all():
                return int(M)
        return None

    def rows(self):
        for i, M in enumerate(self.M_list):
            for j, k in enumerate(self.k):
                yield int(k), int(M), float(self.p[i, j]), float(self.relerr[j]), "pass" if self.verdict[i, j] else "fail"


def p_curve(reference: ReferenceMoments, theory, M_list: Sequence[int], threshold: float = 0.05) -> PValueReport:
    T = np.asarray(getattr(theory, "values", theory), dtype=float)
    if T.shape != reference.mu.shape:
        raise ShapeError(f"theory has {T.size} frequencies, reference has {reference.mu.size}")
    M_list = np.asarray(M_list, dtype=int)
    p = np.empty((M_list.size, T.size))
    degenerate = reference.sigma == 0
    for i, M in enumerate(M_list):
        p[i], _ = _p_values(T, reference.mu, reference.sigma, M)
    relerr = np.abs(T - reference.mu) / np.abs(T)
    return PValueReport(reference.k, M_list, p, relerr, threshold, reference.source_M, degenerate)


@dataclass
class KSResult:
    statistic: float
    p: float
    passed: bool
    alpha: float
    # The exponential mean is estimated from the same samples, so the
    # asymptotic p-value is conservative (a Lilliefors-type caveat).
    mean_estimated: bool = True


def ks_exponential_test(samples, alpha: float = 0.01) -> KSResult:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 100:
        raise SampleSizeError(f"KS test needs at least 100 samples, got {x.size}")
    if np.any(x <= 0):
        raise DomainError("exponential KS test needs strictly positive samples")
    res = _sps.kstest(x, "expon", args=(0.0, x.mean()))
    return KSResult(float(res.statistic), float(res.pvalue), bool(res.pvalue >= alpha), alpha)
