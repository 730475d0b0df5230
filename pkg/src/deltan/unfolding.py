"""Unfolding maps, edge trimming, partitioning, spacings and reunfolding.

The array-level helpers (``gaussian_cumulative``, ``semicircle_cumulative``,
``spacings_array``, ``reunfold_array``) operate along the last axis so that
ensemble pipelines can process many realizations at once.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numpy.polynomial import legendre
from scipy.special import erf

from .ensembles import EnergySpectrum, SpacingSequence
from .errors import (
    ConditioningWarning,
    DegenerateSequenceError,
    InvalidParameterError,
    InvalidWindowError,
    MonotonicityWarning,
    OrderingError,
    PartitionError,
)

__all__ = [
    "UnfoldedSpectrum",
    "SpacingSequence",
    "gaussian_cumulative",
    "semicircle_cumulative",
    "unfold_gaussian_exact",
    "unfold_semicircle",
    "unfold_polynomial",
    "trim_edges",
    "partition",
    "spacings",
    "reunfold",
]

CONDITION_LIMIT = 1e8


@dataclass
class UnfoldedSpectrum:
    levels: np.ndarray
    n_ref: float
    method: str
    residual: Optional[float] = None
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)

    def __len__(self):
        return self.levels.size


def _levels(spectrum):
    if isinstance(spectrum, (EnergySpectrum, UnfoldedSpectrum)):
        return spectrum.levels
    return np.asarray(spectrum, dtype=float)


def _require_ascending(x):
    if x.size > 1 and np.any(np.diff(x, axis=-1) < 0):
        raise OrderingError("levels must be in ascending order")


def gaussian_cumulative(E, n_ref):
    """(n_ref/2) [1 - erf(-E/sqrt 2)]: cumulative count of n_ref standard normals."""
    return 0.5 * n_ref * (1.0 - erf(-np.asarray(E, dtype=float) / np.sqrt(2.0)))


def semicircle_cumulative(E, n):
    """Cumulative semicircle count for support |E| <= sqrt(2n), clamped outside."""
    E = np.asarray(E, dtype=float)
    radius2 = 2.0 * n
    inside = np.clip(E, -np.sqrt(radius2), np.sqrt(radius2))
    root = np.sqrt(np.maximum(radius2 - inside**2, 0.0))
    # arctan(E/root) written as arctan2 so the endpoints evaluate to +-pi/2.
    out = inside * root / (2.0 * np.pi) + (n / np.pi) * np.arctan2(inside, root) + n / 2.0
    return np.clip(out, 0.0, n)


def unfold_gaussian_exact(spectrum, n_ref: Optional[float] = None) -> UnfoldedSpectrum:
    E = _levels(spectrum)
    _require_ascending(E)
    n_ref = E.size if n_ref is None else n_ref
    return UnfoldedSpectrum(gaussian_cumulative(E, n_ref), n_ref, "gaussian")


def unfold_semicircle(spectrum, n_ref: Optional[float] = None) -> UnfoldedSpectrum:
    """``n_ref`` is the GOE matrix dimension; defaults to the level count."""
    E = _levels(spectrum)
    _require_ascending(E)
    n_ref = E.size if n_ref is None else n_ref
    return UnfoldedSpectrum(semicircle_cumulative(E, n_ref), n_ref, "semicircle")


def unfold_polynomial(spectrum, degree: int = 6) -> UnfoldedSpectrum:
    """Least-squares fit of the rank targets i - 1/2 by a degree-``degree`` polynomial.

    The fit runs in a Legendre basis on energies mapped to [-1, 1]; the
    fitted function is the same polynomial as a monomial fit, only better
    conditioned.
    """
    E = _levels(spectrum)
    _require_ascending(E)
    n = E.size
    if degree < 0 or n <= degree + 1:
        raise InvalidParameterError(f"need more than degree+1 = {degree + 1} levels, got {n}")
    lo, hi = E[0], E[-1]
    if hi == lo:
        raise DegenerateSequenceError("all levels coincide")
    x = (2.0 * E - (hi + lo)) / (hi - lo)
    targets = np.arange(1, n + 1) - 0.5
    V = legendre.legvander(x, degree)
    coef, _, rank, sv = np.linalg.lstsq(V, targets, rcond=None)
    fitted = V @ coef
    residual = float(np.sqrt(np.mean((fitted - targets) ** 2)))
    out = UnfoldedSpectrum(fitted, float(n), f"poly:{degree}", residual=residual)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if rank < degree + 1 or cond > CONDITION_LIMIT:
        msg = f"polynomial fit is ill-conditioned (condition number {cond:.3g})"
        out.warnings.append(msg)
        warnings.warn(msg, ConditioningWarning, stacklevel=2)
    if np.any(np.diff(fitted) < 0):
        msg = "polynomial unfolding is not monotone over the fitted levels"
        out.warnings.append(msg)
        warnings.warn(msg, MonotonicityWarning, stacklevel=2)
    return out


def trim_edges(spectrum, count: int):
    """Drop ``count`` levels from each end; keeps the input type."""
    x = _levels(spectrum)
    if count < 0 or 2 * count >= x.size:
        raise InvalidWindowError(f"cannot trim {count} levels from each end of {x.size}")
    kept = x[count : x.size - count]
    if isinstance(spectrum, EnergySpectrum):
        return EnergySpectrum(kept, spectrum.realization_index, spectrum.provenance)
    if isinstance(spectrum, UnfoldedSpectrum):
        return UnfoldedSpectrum(kept, spectrum.n_ref, spectrum.method, spectrum.residual, list(spectrum.warnings))
    return kept


def partition(unfolded, m_parts: int) -> List[UnfoldedSpectrum]:
    """Contiguous blocks of equal length, in order (no re-unfolding per block)."""
    x = _levels(unfolded)
    if m_parts < 1 or x.size % m_parts:
        raise PartitionError(f"{x.size} levels cannot be split into {m_parts} equal blocks")
    method = unfolded.method if isinstance(unfolded, UnfoldedSpectrum) else "unknown"
    n_ref = unfolded.n_ref if isinstance(unfolded, UnfoldedSpectrum) else float(x.size)
    return [UnfoldedSpectrum(b, n_ref, method) for b in x.reshape(m_parts, -1)]


def spacings_array(levels):
    s = np.diff(np.asarray(levels, dtype=float), axis=-1)
    if np.any(s < 0):
        raise OrderingError("negative spacing: unfolded levels are not monotone")
    return s


def spacings(unfolded) -> SpacingSequence:
    x = _levels(unfolded)
    if x.size < 2:
        raise InvalidParameterError("need at least 2 levels to form spacings")
    return SpacingSequence(spacings_array(x), reunfolded=False)


def reunfold_array(s):
    s = np.asarray(s, dtype=float)
    total = s.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise DegenerateSequenceError("cannot reunfold a sequence with no positive spacing")
    return s * (s.shape[-1] / total)


def reunfold(seq) -> SpacingSequence:
    """Divide by the sample mean so the spacings sum to their count."""
    s = seq.spacings if isinstance(seq, SpacingSequence) else np.asarray(seq, dtype=float)
    return SpacingSequence(reunfold_array(s), reunfolded=True)


def levels_from_spacings(first: float, seq: SpacingSequence) -> np.ndarray:
    return first + np.concatenate([[0.0], np.cumsum(seq.spacings)])
