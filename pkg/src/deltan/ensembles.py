"""Seedable generators for GDE, GOE and Gaussian beta-ensemble spectra.

GOE normalization: the symmetric matrix is ``(A + A.T) / 2`` with ``A`` a
matrix of standard normals, i.e. diagonal entries are N(0, 1) and
off-diagonal entries N(0, 1/2).  The semicircle then has support
``|E| <= sqrt(2 n)``, which is the support assumed by
:func:`deltan.unfolding.unfold_semicircle`.  The element variance is
chosen to match that support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from scipy.linalg import lapack

from ._rng import SeedLike, as_rng, derive_rng
from .errors import DiagonalizationError, InvalidDimensionError, InvalidParameterError

KINDS = ("GDE", "GOE", "BetaEnsemble", "PoissonSpacings")


@dataclass(frozen=True)
class EnsembleConfig:
    kind: str
    dim: int
    realizations: int = 1
    master_seed: int = 0
    beta: float = 1.0
    lam: float = 1.0
    goe_method: str = "dense"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        min_dim = 1 if self.kind == "PoissonSpacings" else 2
        if self.dim < min_dim:
            raise InvalidDimensionError(f"dim must be >= {min_dim}, got {self.dim}")
        if self.realizations < 1:
            raise InvalidParameterError(f"realizations must be >= 1, got {self.realizations}")
        if self.beta < 0:
            raise InvalidParameterError(f"beta must be >= 0, got {self.beta}")
        if self.lam <= 0:
            raise InvalidParameterError(f"lambda must be > 0, got {self.lam}")


@dataclass
class EnergySpectrum:
    levels: np.ndarray
    realization_index: int = 0
    provenance: Optional[EnsembleConfig] = field(default=None, repr=False)

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)

    def __len__(self):
        return self.levels.size


def _check_dim(n, minimum=2):
    if int(n) != n or n < minimum:
        raise InvalidDimensionError(f"n must be an integer >= {minimum}, got {n}")
    return int(n)


def sample_gde(n: int, seed: SeedLike) -> EnergySpectrum:
    """Sorted i.i.d. standard normal levels (Gaussian diagonal ensemble)."""
    n = _check_dim(n)
    return EnergySpectrum(np.sort(as_rng(seed).standard_normal(n)))


def goe_matrix(n: int, seed: SeedLike) -> np.ndarray:
    n = _check_dim(n)
    a = as_rng(seed).standard_normal((n, n))
    return (a + a.T) / 2.0


def _eigvalsh(matrix, seed):
    try:
        return np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(f"eigensolver did not converge: {exc}", seed=seed) from exc


def _tridiagonal_eigvals(diag, off, seed=None):
    # dsterf: Pal-Walker-Kahan QL/QR, eigenvalues only, returned ascending.
    w, info = lapack.dsterf(np.asarray(diag, float), np.asarray(off, float))
    if info != 0:
        raise DiagonalizationError(f"dsterf failed with info={info}", seed=seed)
    return w


def _chi(rng, dof):
    dof = np.asarray(dof, dtype=float)
    out = np.zeros_like(dof)
    pos = dof > 0
    # chi_0 is identically zero.
    out[pos] = np.sqrt(rng.gamma(dof[pos] / 2.0, 2.0))
    return out


def goe_tridiagonal(n: int, seed: SeedLike):
    """Diagonal and off-diagonal of the tridiagonal model with GOE eigenvalues.

    Householder reduction of ``(A + A.T)/2`` gives diagonal N(0, 1) and
    off-diagonal ``chi_{n-i} / sqrt(2)``; the eigenvalue law is identical to
    the dense construction at O(n^2) cost.
    """
    n = _check_dim(n)
    rng = as_rng(seed)
    diag = rng.standard_normal(n)
    off = _chi(rng, np.arange(n - 1, 0, -1)) / np.sqrt(2.0)
    return diag, off


def sample_goe(n: int, seed: SeedLike, method: str = "dense") -> EnergySpectrum:
    """Ascending GOE eigenvalues; bulk in ``[-sqrt(2n), sqrt(2n)]``.

    ``method="dense"`` diagonalizes the full symmetric matrix;
    ``method="tridiagonal"`` samples the equivalent tridiagonal model.
    """
    if method == "dense":
        return EnergySpectrum(_eigvalsh(goe_matrix(n, seed), seed))
    if method == "tridiagonal":
        diag, off = goe_tridiagonal(n, seed)
        return EnergySpectrum(_tridiagonal_eigvals(diag, off, seed))
    raise InvalidParameterError(f"unknown GOE method {method!r}")


def beta_ensemble_tridiagonal(n: int, beta: float, lam: float, seed: SeedLike):
    """Entries of the tridiagonal Gaussian beta-ensemble matrix.

    diagonal ~ N(0, sqrt(1/(2 lam))); off-diagonal i (1-based) ~
    sqrt(1/(4 lam)) * chi_{(n - i + 1) beta}.
    """
    n = _check_dim(n)
    if beta < 0:
        raise InvalidParameterError(f"beta must be >= 0, got {beta}")
    if lam <= 0:
        raise InvalidParameterError(f"lambda must be > 0, got {lam}")
    rng = as_rng(seed)
    diag = rng.standard_normal(n) * np.sqrt(1.0 / (2.0 * lam))
    i = np.arange(1, n)
    off = np.sqrt(1.0 / (4.0 * lam)) * _chi(rng, (n - i + 1) * beta)
    return diag, off


def tridiagonal_to_dense(diag, off):
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def sample_beta_ensemble(n: int, beta: float, lam: float, seed: SeedLike) -> EnergySpectrum:
    diag, off = beta_ensemble_tridiagonal(n, beta, lam, seed)
    if beta == 0:
        return EnergySpectrum(np.sort(diag))
    return EnergySpectrum(_tridiagonal_eigvals(diag, off, seed))


@dataclass
class SpacingSequence:
    spacings: np.ndarray
    reunfolded: bool = False

    def __post_init__(self):
        self.spacings = np.asarray(self.spacings, dtype=float)

    def __len__(self):
        return self.spacings.size


def sample_poisson_spacings(n: int, seed: SeedLike) -> SpacingSequence:
    """n i.i.d. Exp(1) spacings, unsorted."""
    n = _check_dim(n, minimum=1)
    return SpacingSequence(as_rng(seed).exponential(1.0, n))


def poisson_levels(n: int, seed: SeedLike) -> EnergySpectrum:
    """Unit-density Poisson spectrum: cumulative sums of Exp(1) spacings."""
    s = sample_poisson_spacings(n, seed).spacings
    return EnergySpectrum(np.cumsum(s))


def realization(config: EnsembleConfig, r: int):
    """Realization ``r`` of ``config``; drawn from stream (master_seed, r)."""
    seed = derive_rng(config.master_seed, r)
    if config.kind == "GDE":
        out = sample_gde(config.dim, seed)
    elif config.kind == "GOE":
        out = sample_goe(config.dim, seed, method=config.goe_method)
    elif config.kind == "BetaEnsemble":
        out = sample_beta_ensemble(config.dim, config.beta, config.lam, seed)
    else:
        return sample_poisson_spacings(config.dim, seed)
    out.realization_index = r
    out.provenance = config
    return out


def iter_ensemble(config: EnsembleConfig, start: int = 0, stop: Optional[int] = None) -> Iterator:
    stop = config.realizations if stop is None else stop
    for r in range(start, stop):
        yield realization(config, r)


def ensemble_block(config: EnsembleConfig, start: int, stop: int) -> np.ndarray:
    """Realizations ``start..stop-1`` stacked as rows."""
    rows = []
    for item in iter_ensemble(config, start, stop):
        rows.append(item.levels if isinstance(item, EnergySpectrum) else item.spacings)
    return np.vstack(rows)
