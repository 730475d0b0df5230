from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deltan.errors import InvalidParameterError, InvalidSectorError, InvalidWindowError, ResourceError
from deltan.ensembles import EnergySpectrum
from deltan.spinchain import (
    SpinChainConfig,
    build_basis,
    build_hamiltonian,
    central_window,
    diagonalize,
    realize_chain,
    sample_fields,
    window_bounds,
)

SX = np.array([[0, 0.5], [0.5, 0]])
SY = np.array([[0, -0.5j], [0.5j, 0]])
SZ = np.array([[0.5, 0], [0, -0.5]])


def _site_op(op, n, L):
    # site n is bit n; kron order puts bit 0 last
    out = np.array([[1.0 + 0j]])
    for m in reversed(range(L)):
        out = np.kron(out, op if m == n else np.eye(2))
    return out


def kron_hamiltonian(L, fields, J, boundary, defect=None, eps=0.0):
    """Full 2^L Hamiltonian from Pauli Kronecker products, basis index = bitmask
    with a set bit meaning spin up."""
    dim = 2**L
    H = np.zeros((dim, dim), dtype=complex)
    for n in range(L):
        H += fields[n] * _site_op(SZ, n, L)
    if defect is not None:
        H += eps * _site_op(SZ, defect - 1, L)
    bonds = [(n, n + 1) for n in range(L - 1)] + ([(L - 1, 0)] if boundary == "periodic" else [])
    for i, j in bonds:
        for op in (SX, SY, SZ):
            H += J * _site_op(op, i, L) @ _site_op(op, j, L)
    # kron basis has index bit=0 meaning the first basis vector (spin up for SZ=+1/2)
    # so flip bits to map "set bit = up"
    perm = np.array([(dim - 1) ^ s for s in range(dim)])
    return H[np.ix_(perm, perm)].real


@pytest.mark.parametrize("L,expected", [(14, 3432), (2, 2), (4, 6), (12, 924)])
def test_basis_dimension(L, expected):
    b = build_basis(L, 0)
    assert b.dimension == expected
    assert np.all(np.diff(b.states) > 0)


def test_basis_sector_magnetization():
    b = build_basis(7, 0.5)
    assert b.dimension == comb(7, 4)
    assert all(bin(int(s)).count("1") == 4 for s in b.states)


@pytest.mark.parametrize("L,sz", [(4, 0.5), (4, 3), (5, 0)])
def test_basis_unreachable_sector(L, sz):
    with pytest.raises(InvalidSectorError):
        build_basis(L, sz)


def test_fields():
    assert np.all(sample_fields(10, 0.0, 1) == 0)
    f = sample_fields(1000, 2.5, 3)
    assert np.all(np.abs(f) <= 2.5)
    with pytest.raises(InvalidParameterError):
        sample_fields(3, -1.0, 0)


def test_fields_site_means():
    L, M, w = 14, 1000, 3.0
    F = np.stack([sample_fields(L, w, (4, r)) for r in range(M)])
    # literal bound; it is two standard errors per site, so the seed is fixed
    assert np.all(np.abs(F.mean(axis=0)) < 4 * w / np.sqrt(12 * M))


def test_two_site_singlet_triplet():
    cfg = SpinChainConfig(2, 0.0, boundary="open", sz_sector=None)
    ev = diagonalize(build_hamiltonian(cfg, np.zeros(2))).levels
    np.testing.assert_allclose(ev, [-0.75, 0.25, 0.25, 0.25], atol=1e-14)


@pytest.mark.parametrize("boundary", ["periodic", "open"])
@pytest.mark.parametrize("L", [3, 4, 6])
def test_matches_kronecker_oracle_full_space(L, boundary):
    rng = np.random.default_rng(L)
    fields = rng.uniform(-2, 2, L)
    cfg = SpinChainConfig(L, 2.0, coupling=0.8, defect_site=2, defect_strength=0.3, boundary=boundary, sz_sector=None)
    H = build_hamiltonian(cfg, fields)
    K = kron_hamiltonian(L, fields, 0.8, boundary, defect=2, eps=0.3)
    np.testing.assert_allclose(H, K, atol=1e-13)


@given(seed=st.integers(0, 10**6))
def test_sector_blocks_reassemble_full_spectrum(seed):
    L = 6
    fields = np.random.default_rng(seed).uniform(-1, 1, L)
    full = SpinChainConfig(L, 1.0, sz_sector=None)
    ev_full = np.sort(np.linalg.eigvalsh(kron_hamiltonian(L, fields, 1.0, "periodic")))
    parts = [diagonalize(build_hamiltonian(SpinChainConfig(L, 1.0, sz_sector=s), fields)).levels
             for s in (-3, -2, -1, 0, 1, 2, 3)]
    np.testing.assert_allclose(np.sort(np.concatenate(parts)), ev_full, atol=1e-11)
    assert build_hamiltonian(full, fields).shape == (64, 64)


@given(seed=st.integers(0, 10**6), L=st.integers(3, 9))
def test_hamiltonian_symmetric(seed, L):
    cfg = SpinChainConfig(L, 1.5, sz_sector=0 if L % 2 == 0 else 0.5)
    H = build_hamiltonian(cfg, sample_fields(L, 1.5, seed))
    assert np.array_equal(H, H.T)


def test_spin_flip_symmetry_zero_field():
    L = 4
    basis = build_basis(L, 0)
    cfg = SpinChainConfig(L, 0.0)
    H = build_hamiltonian(cfg, np.zeros(L), basis)
    flipped = np.array(sorted(((1 << L) - 1) ^ s for s in basis.states))
    assert np.array_equal(flipped, basis.states)
    comp = ((1 << L) - 1) ^ basis.states
    P = np.zeros_like(H)
    P[np.arange(basis.dimension), np.searchsorted(basis.states, comp)] = 1
    np.testing.assert_allclose(np.linalg.eigvalsh(P @ H @ P.T), np.linalg.eigvalsh(H), atol=1e-12)


def test_resource_budget():
    cfg = SpinChainConfig(12, 1.0, max_dim=500)
    with pytest.raises(ResourceError):
        build_hamiltonian(cfg, np.zeros(12))


@pytest.mark.parametrize("kw", [dict(sites=1), dict(sites=17), dict(disorder_width=-1), dict(defect_site=0),
                                dict(defect_site=9), dict(boundary="twisted")])
def test_config_validation(kw):
    base = dict(sites=8, disorder_width=1.0)
    base.update(kw)
    with pytest.raises(InvalidParameterError):
        SpinChainConfig(**base)


def test_diagonalize_examples(rng):
    np.testing.assert_array_equal(diagonalize(np.eye(5)).levels, np.ones(5))
    np.testing.assert_allclose(diagonalize(np.diag([3.0, 1.0, 2.0])).levels, [1, 2, 3])
    A = rng.normal(size=(50, 50))
    A = A + A.T
    ev = diagonalize(A).levels
    assert abs(ev.sum() - np.trace(A)) < 1e-8 * np.abs(A).max() * 50
    with pytest.raises(InvalidParameterError):
        diagonalize(np.ones((2, 3)))


def test_diagonalize_residuals(rng):
    A = rng.normal(size=(80, 80))
    A = (A + A.T) / 2
    ev = diagonalize(A).levels
    w, V = np.linalg.eigh(A)
    for j in (0, 40, 79):
        assert np.linalg.norm(A @ V[:, j] - ev[j] * V[:, j]) <= 1e-8 * np.linalg.norm(A, 2)


def test_central_window_examples():
    lo, hi = window_bounds(3432, 1 / 3)
    assert hi - lo == 1144
    spec = EnergySpectrum(np.arange(1.0, 10.0))
    np.testing.assert_array_equal(central_window(spec, 1 / 3).levels, [4, 5, 6])
    np.testing.assert_array_equal(central_window(spec, 1.0).levels, spec.levels)
    with pytest.raises(InvalidWindowError):
        central_window(spec, 0.1)
    with pytest.raises(InvalidWindowError):
        central_window(spec, 0.0)


def test_level_count_and_determinism():
    cfg = SpinChainConfig(8, 2.0, seed=5)
    a = realize_chain(cfg, 3)
    assert len(a) == comb(8, 4)
    assert a.levels.tobytes() == realize_chain(cfg, 3).levels.tobytes()


def test_common_random_numbers_across_omega():
    f1 = sample_fields(10, 1.0, (3, "fields", 2))
    f2 = sample_fields(10, 4.0, (3, "fields", 2))
    np.testing.assert_allclose(f2, 4 * f1)
