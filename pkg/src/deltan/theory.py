"""Closed-form power-spectrum curves and brute-force oracles.

Integrable (Poisson / GDE) spectra:

* unpartitioned kernel <d_l d_m> = min(l, m) gives
  <P_k> = 1 / (2 sin^2(pi k/N)), with the finite-N expression
  [1 + 2N - cos(wN) + sin(wN)/tan(w/2)] / (4N sin^2(w/2)), w = 2 pi k/N;
* reunfolded kernel (N min(l, m) - l m)/(N + 1) gives the leading
  1/(4 sin^2(pi k/N)) and the prefactored N / (4 (N+1) sin^2(w/2)).

Chaotic (GOE) spectra use the two-point form-factor expression in
:func:`goe_power`.  Beyond the Nyquist frequency k = N/2 the GOE curve is an
extrapolation and is never compared against data here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalConsistencyError

SMALL_OMEGA = 1e-4

FAMILIES = {
    "gde": "GDE_Unpartitioned",
    "gde-exact": "GDE_Unpartitioned_Exact",
    "gde-corrected": "GDE_Corrected",
    "gde-corrected-exact": "GDE_Corrected",
    "goe": "GOE_TwoPoint",
    "small-k": "SmallK_Asymptote",
}


def _check_k(k, N):
    k = np.asarray(k)
    if N < 2 or np.any(k < 1) or np.any(k > N - 1):
        raise DomainError(f"k must lie in [1, N-1] = [1, {N - 1}]")
    return k.astype(float)


def _sin2_half(w):
    """sin^2(w/2), with a Taylor branch for |w| < SMALL_OMEGA."""
    w = np.asarray(w, dtype=float)
    series = (w / 2) ** 2 * (1 - (w / 2) ** 2 / 3)
    return np.where(np.abs(w) < SMALL_OMEGA, series, np.sin(w / 2) ** 2)


def _cot_half(w):
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        direct = 1.0 / np.tan(w / 2)
        series = 2.0 / w - w / 6 - w**3 / 360
    return np.where(np.abs(w) < SMALL_OMEGA, series, direct)


def _sin2_pi(k, N):
    """sin^2(pi k/N) through the reflected argument min(k, N-k)."""
    return _sin2_half(2.0 * np.pi * np.minimum(k, N - k) / N)


def gde_power_leading(k, N):
    k = _check_k(k, N)
    return 1.0 / (2.0 * _sin2_pi(k, N))


def gde_power_exact(k, N):
    k = _check_k(k, N)
    w = 2.0 * np.pi * k / N
    num = 1.0 + 2.0 * N - np.cos(w * N) + np.sin(w * N) * _cot_half(w)
    return num / (4.0 * N * _sin2_half(w))


def gde_power_corrected(k, N, exact: bool = False):
    k = _check_k(k, N)
    base = 1.0 / (4.0 * _sin2_pi(k, N))
    return base * (N / (N + 1.0)) if exact else base


def small_k_asymptote(k, N, corrected: bool = False):
    k = _check_k(k, N)
    c = 4.0 if corrected else 2.0
    return N**2 / (c * np.pi**2 * k**2)


def corr_kernel(kind: str, l, m, N):
    l, m = np.asarray(l), np.asarray(m)
    if np.any(l < 1) or np.any(m < 1) or np.any(l > N) or np.any(m > N):
        raise DomainError(f"indices must lie in [1, {N}]")
    mn = np.minimum(l, m).astype(float)
    if kind == "plain":
        return mn
    if kind == "corrected":
        return (N * mn - l * m) / (N + 1.0)
    raise DomainError(f"unknown kernel kind {kind!r}")


def brute_force_power(kind: str, N: int, k, tol: float = 1e-10):
    """(1/N) sum_{l,m} <d_l d_m> e^{i w_k (l - m)} by direct O(N^2) summation."""
    if N > 4096:
        raise DomainError("brute-force oracle is limited to N <= 4096")
    if N == 1:
        if kind == "corrected":
            return 0.0
        raise DomainError("N = 1 has no frequencies for the plain kernel")
    k = np.atleast_1d(_check_k(k, N))
    idx = np.arange(1, N + 1)
    K = corr_kernel(kind, idx[:, None], idx[None, :], N)
    out = np.empty(k.size)
    for j, kk in enumerate(k):
        phase = np.exp(1j * 2 * np.pi * kk / N * idx)
        val = phase @ K @ phase.conj() / N
        scale = max(abs(val.real), 1.0)
        if abs(val.imag) > tol * scale:
            raise NumericalConsistencyError(f"imaginary residue {val.imag:.3g} at k={kk}")
        out[j] = val.real
    return out if out.size > 1 else float(out[0])


def goe_form_factor(tau):
    """GOE two-level form factor K(tau)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("tau must be >= 0")
    t_lo = np.minimum(tau, 1.0)
    t_hi = np.maximum(tau, 1.0)
    low = 2 * t_lo - t_lo * np.log1p(2 * t_lo)
    high = 2 - t_hi * np.log((2 * t_hi + 1) / (2 * t_hi - 1))
    out = np.where(tau <= 1.0, low, high)
    return out if out.ndim else float(out)


def goe_power(k, N):
    k = _check_k(k, N)
    bracket = (goe_form_factor(k / N) - 1) / k**2 + (goe_form_factor((N - k) / N) - 1) / (N - k) ** 2
    return N**2 / (4 * np.pi**2) * bracket + 1.0 / (4 * _sin2_pi(k, N)) - 1.0 / 12


def reunfolded_moment_identities(N: int) -> dict:
    """<s~_i>, <s~_i^2>, <s~_i s~_j> (i != j) for N reunfolded Exp(1) spacings."""
    if N < 1:
        raise DomainError("N must be >= 1")
    return {"mean": 1.0, "second_moment": 2.0 * N / (N + 1), "cross_moment": N / (N + 1.0)}


def delta_squared_theory(n, N, corrected: bool):
    n = np.asarray(n, dtype=float)
    if corrected:
        return n * N / (N + 1.0) - n**2 / (N + 1.0)
    return n


def ratio_constants() -> dict:
    return {
        "poisson": 2 * math.log(2) - 1,
        "goe_surmise": 4 - 2 * math.sqrt(3),
        "goe_large_n": 0.5307,
    }


@dataclass
class TheoryCurve:
    family: str
    dim: int
    values: np.ndarray

    @property
    def k(self):
        return np.arange(1, self.dim)


def theory_curve(family: str, N: int) -> TheoryCurve:
    k = np.arange(1, N)
    if family == "gde":
        v = gde_power_leading(k, N)
    elif family == "gde-exact":
        v = gde_power_exact(k, N)
    elif family == "gde-corrected":
        v = gde_power_corrected(k, N)
    elif family == "gde-corrected-exact":
        v = gde_power_corrected(k, N, exact=True)
    elif family == "goe":
        v = goe_power(k, N)
    elif family == "small-k":
        v = small_k_asymptote(k, N)
    else:
        raise DomainError(f"unknown theory family {family!r}; expected one of {sorted(FAMILIES)}")
    return TheoryCurve(FAMILIES[family], N, np.asarray(v, dtype=float))
