"""Disordered Heisenberg spin-1/2 chain in a fixed-magnetization sector.

H = sum_n w_n S^z_n + eps S^z_d + J sum_<n,n+1> S_n . S_{n+1}

Site n (1-based) is bit n-1 of a basis bitmask; a set bit is spin up.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, floor
from typing import Optional

import numpy as np

from ._rng import SeedLike, as_rng, derive_rng
from .ensembles import EnergySpectrum
from .errors import (
    DiagonalizationError,
    InvalidParameterError,
    InvalidSectorError,
    InvalidWindowError,
    ResourceError,
)

DEFAULT_MAX_DIM = 4000


@dataclass(frozen=True)
class SpinChainConfig:
    sites: int
    disorder_width: float
    coupling: float = 1.0
    defect_site: Optional[int] = None
    defect_strength: float = 0.0
    boundary: str = "periodic"
    sz_sector: Optional[float] = 0
    seed: int = 0
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        if not 2 <= self.sites <= 16:
            raise InvalidParameterError(f"sites must be in [2, 16], got {self.sites}")
        if self.disorder_width < 0:
            raise InvalidParameterError("disorder_width must be >= 0")
        if self.defect_site is not None and not 1 <= self.defect_site <= self.sites:
            raise InvalidParameterError(f"defect_site must be in [1, {self.sites}]")
        if self.boundary not in ("periodic", "open"):
            raise InvalidParameterError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")


@dataclass(frozen=True)
class SectorBasis:
    sites: int
    states: np.ndarray  # strictly increasing bitmasks
    sz_sector: Optional[float]

    @property
    def dimension(self) -> int:
        return int(self.states.size)


def build_basis(L: int, sz_sector: Optional[float] = 0) -> SectorBasis:
    """All bitmasks with ``L/2 + sz_sector`` up spins, ascending.

    ``sz_sector=None`` returns the full 2^L space.
    """
    if sz_sector is None:
        return SectorBasis(L, np.arange(2**L, dtype=np.int64), None)
    n_up = L / 2 + sz_sector
    if abs(sz_sector) > L / 2 or n_up != int(n_up):
        raise InvalidSectorError(f"S_z = {sz_sector} is not reachable with L = {L}")
    n_up = int(n_up)
    states = sorted(sum(1 << i for i in c) for c in combinations(range(L), n_up))
    states = np.array(states, dtype=np.int64)
    assert states.size == comb(L, n_up)
    return SectorBasis(L, states, sz_sector)


def sample_fields(L: int, omega: float, seed: SeedLike) -> np.ndarray:
    """L i.i.d. uniform fields on [-omega, omega]."""
    if omega < 0:
        raise InvalidParameterError(f"omega must be >= 0, got {omega}")
    u = as_rng(seed).uniform(-1.0, 1.0, L)
    return omega * u


def _bonds(L, boundary):
    bonds = [(n, n + 1) for n in range(L - 1)]
    if boundary == "periodic":
        # For L = 2 this repeats the single bond.
        bonds.append((L - 1, 0))
    return bonds


def build_hamiltonian(config: SpinChainConfig, fields, basis: Optional[SectorBasis] = None) -> np.ndarray:
    L = config.sites
    if basis is None:
        basis = build_basis(L, config.sz_sector)
    if basis.sites != L:
        raise InvalidParameterError("basis and config disagree on the number of sites")
    d = basis.dimension
    if d > config.max_dim:
        raise ResourceError(f"sector dimension {d} exceeds the dense budget max_dim={config.max_dim}")
    fields = np.asarray(fields, dtype=float)
    if fields.shape != (L,):
        raise InvalidParameterError(f"expected {L} fields, got shape {fields.shape}")

    states = basis.states
    bits = (states[:, None] >> np.arange(L)) & 1
    sz = bits - 0.5
    diag = sz @ fields
    if config.defect_site is not None:
        diag = diag + config.defect_strength * sz[:, config.defect_site - 1]

    H = np.zeros((d, d))
    J = config.coupling
    rows = np.arange(d)
    for i, j in _bonds(L, config.boundary):
        diag = diag + J * sz[:, i] * sz[:, j]
        flip = bits[:, i] != bits[:, j]
        src = rows[flip]
        target = states[flip] ^ ((1 << i) | (1 << j))
        dst = np.searchsorted(states, target)
        np.add.at(H, (dst, src), J / 2.0)
    H[rows, rows] = diag
    return H


def diagonalize(matrix) -> EnergySpectrum:
    """All eigenvalues of a real symmetric matrix, ascending (LAPACK syevd)."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError("matrix has non-finite entries")
    try:
        return EnergySpectrum(np.linalg.eigvalsh(a))
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(f"eigensolver did not converge: {exc}") from exc


def window_bounds(d: int, fraction: float):
    if not 0 < fraction <= 1:
        raise InvalidWindowError(f"fraction must be in (0, 1], got {fraction}")
    n_keep = int(floor(fraction * d + 1e-9))
    if n_keep < 2:
        raise InvalidWindowError(f"window keeps {n_keep} levels; need at least 2")
    start = (d - n_keep) // 2
    return start, start + n_keep


def central_window(spectrum: EnergySpectrum, fraction: float) -> EnergySpectrum:
    """The floor(fraction*d) levels starting at 0-based index floor((d - n_keep)/2)."""
    lo, hi = window_bounds(len(spectrum), fraction)
    return EnergySpectrum(spectrum.levels[lo:hi], spectrum.realization_index, spectrum.provenance)


def realize_chain(config: SpinChainConfig, r: int, basis: Optional[SectorBasis] = None) -> EnergySpectrum:
    """Realization r: fields from stream (seed, "fields", r), full sector spectrum."""
    rng = derive_rng(config.seed, "fields", r)
    fields = sample_fields(config.sites, config.disorder_width, rng)
    H = build_hamiltonian(config, fields, basis)
    try:
        spec = diagonalize(H)
    except DiagonalizationError as exc:
        raise DiagonalizationError(str(exc), seed=(config.seed, "fields", r)) from exc
    spec.realization_index = r
    return spec
