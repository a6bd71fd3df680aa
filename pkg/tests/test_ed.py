import math
from math import comb

import numpy as np
import pytest

from xychain.ed import (apply_hamiltonian, central_pair, free_fermion_finite, ground_state,
                        magnetizations, reduced_pair_rho, spin_basis, spin_correlators,
                        thermal_state)
from xychain.ed.basis import XYHamiltonian, popcount
from xychain.ed.free_fermion import central_coefficients
from xychain.ed.io import load_state, save_state
from xychain.ed.lanczos import lanczos_ground
from xychain.ed.states import SpinState
from xychain.errors import ParameterError
from xychain.pair_state import concurrence_closed, concurrence_wootters
from xychain.spectrum import ChainParams, correlator_table

ELEMENTS = ("x_plus", "x_minus", "y_plus", "y_minus", "z")

# single-site basis: index 0 = down, 1 = up (bit value)
SZ = np.diag([-0.5, 0.5])
SP = np.array([[0.0, 0.0], [1.0, 0.0]])
SM = SP.T


def site_op(op, i, N):
    out = np.eye(1)
    for site in reversed(range(N)):
        out = np.kron(out, op if site == i else np.eye(2))
    return out


def dense_xy(N, J, h, bc):
    H = np.zeros((2 ** N, 2 ** N))
    pairs = [(i, i + 1) for i in range(N - 1)] + ([(N - 1, 0)] if bc == "periodic" and N > 2 else [])
    for i, j in pairs:
        H += 0.5 * J * (site_op(SP, i, N) @ site_op(SM, j, N) + site_op(SM, i, N) @ site_op(SP, j, N))
    for i in range(N):
        H -= h * site_op(SZ, i, N)
    return H


def test_sector_dimensions_and_lookup():
    for N, n_up in [(6, 3), (9, 4), (12, 0), (12, 12), (13, 7)]:
        basis = spin_basis(N, n_up)
        assert basis.dim == comb(N, n_up)
        assert np.all(popcount(basis.states) == n_up)
        assert np.all(np.diff(basis.states) > 0)
        np.testing.assert_array_equal(basis.index(basis.states), np.arange(basis.dim))
    other = spin_basis(8, 3).states
    assert np.all(spin_basis(8, 4).index(other) == -1)


def test_single_hop_two_sites():
    basis = spin_basis(2)
    v = np.zeros(4)
    v[0b01] = 1.0  # site 0 up, site 1 down
    out = apply_hamiltonian(v, basis, ChainParams(h=0.0), "open")
    expected = np.zeros(4)
    expected[0b10] = 0.5
    np.testing.assert_allclose(out, expected, atol=1e-15)


@pytest.mark.parametrize("bc", ["open", "periodic"])
def test_all_up_is_eigenvector(bc):
    N, h = 7, 0.8
    basis = spin_basis(N, N)
    out = apply_hamiltonian(np.ones(1), basis, ChainParams(h=h), bc)
    assert out[0] == pytest.approx(-h * N / 2, abs=1e-14)


@pytest.mark.parametrize("N, bc", [(3, "open"), (3, "periodic"), (5, "periodic"), (6, "open")])
def test_matvec_matches_dense_kron(N, bc):
    params = ChainParams(J=1.3, h=0.4)
    v = np.random.default_rng(N).normal(size=2 ** N)
    got = apply_hamiltonian(v, spin_basis(N), params, bc)
    np.testing.assert_allclose(got, dense_xy(N, 1.3, 0.4, bc) @ v, atol=1e-12)


def test_matvec_stays_in_sector():
    N = 8
    full = spin_basis(N)
    ham = XYHamiltonian(full, ChainParams(h=0.3), "periodic")
    rng = np.random.default_rng(0)
    for n_up in range(N + 1):
        v = np.where(popcount(full.states) == n_up, rng.normal(size=full.dim), 0.0)
        out = ham.matvec(v)
        assert np.all(out[popcount(full.states) != n_up] == 0.0)


def test_matvec_dimension_check():
    with pytest.raises(ParameterError):
        apply_hamiltonian(np.ones(5), spin_basis(4, 2), ChainParams(), "open")


def test_two_site_ground_state_is_singlet():
    state = ground_state(2, "open", ChainParams())
    assert state.energy == pytest.approx(-0.5, abs=1e-12)
    v = state.vector * np.sign(state.vector[0])
    np.testing.assert_allclose(v, [1 / math.sqrt(2), -1 / math.sqrt(2)], atol=1e-10)
    assert concurrence_wootters(reduced_pair_rho(state, 0, 1)).value == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("N", [4, 6, 8, 10, 12])
@pytest.mark.parametrize("bc", ["open", "periodic"])
def test_lanczos_matches_dense(N, bc):
    h = 0.37
    exact = np.linalg.eigvalsh(dense_xy(N, 1.0, h, bc))[0] if N <= 10 else None
    state = ground_state(N, bc, ChainParams(h=h))
    if exact is None:
        ens = thermal_state(N, bc, ChainParams(h=h, T=1.0))
        exact = ens.all_energies()[0]
    assert state.energy == pytest.approx(exact, abs=1e-10)
    assert state.residual <= 1e-8


def test_lanczos_residual_and_determinism():
    basis = spin_basis(14, 7)
    ham = XYHamiltonian(basis, ChainParams(), "periodic")
    a = lanczos_ground(ham.matvec, basis.dim)
    b = lanczos_ground(ham.matvec, basis.dim)
    assert a.residual <= 1e-8
    assert a.energy == b.energy
    np.testing.assert_array_equal(a.vector, b.vector)
    # small Krylov spaces need restarts but land on the same state
    c = lanczos_ground(ham.matvec, basis.dim, krylov=8)
    assert c.energy == pytest.approx(a.energy, abs=1e-10)


def test_saturated_sixteen_site_chain():
    state = ground_state(16, "periodic", ChainParams(h=2.0))
    assert state.energy == pytest.approx(-16.0, abs=1e-10)
    assert state.sector == 16
    rho = reduced_pair_rho(state, 3, 7).matrix
    np.testing.assert_allclose(rho, np.diag([1.0, 0, 0, 0]), atol=1e-14)
    assert spin_correlators(state, 3, 7) == pytest.approx((0.0, 0.0, 0.25), abs=1e-14)


def test_singlet_correlators():
    state = ground_state(2, "open", ChainParams())
    assert spin_correlators(state, 0, 1) == pytest.approx((-0.25, -0.25, -0.25), abs=1e-10)


def test_thermal_two_site_partition_function():
    ens = thermal_state(2, "open", ChainParams(T=1.0))
    np.testing.assert_allclose(ens.all_energies(), [-0.5, 0.0, 0.0, 0.5], atol=1e-14)
    assert ens.partition_function == pytest.approx(2 + math.exp(0.5) + math.exp(-0.5), rel=1e-12)
    assert ens.log_partition == pytest.approx(math.log(ens.partition_function), abs=1e-14)
    assert ens.all_populations().sum() == pytest.approx(1.0, abs=1e-12)


def test_infinite_temperature_populations():
    ens = thermal_state(6, "periodic", ChainParams(h=0.3, T=1e6))
    pops = ens.all_populations()
    assert np.max(np.abs(pops - 1 / 64)) < 1e-5
    np.testing.assert_allclose(reduced_pair_rho(ens, 0, 3).matrix, np.eye(4) / 4, atol=1e-5)


@pytest.mark.parametrize("bc, h", [("open", 0.3), ("periodic", 0.45)])
def test_cold_thermal_matches_ground_state(bc, h):
    N = 8
    params = ChainParams(h=h)
    gs = ground_state(N, bc, params)
    assert not gs.degenerate
    ens = thermal_state(N, bc, params.with_(T=1e-6))
    for pair in [(2, 4), (3, 4), (1, 5)]:
        np.testing.assert_allclose(reduced_pair_rho(ens, *pair).matrix,
                                   reduced_pair_rho(gs, *pair).matrix, atol=1e-4)


def test_thermal_size_guard():
    with pytest.raises(ParameterError):
        thermal_state(13, "open", ChainParams(T=1.0))
    with pytest.raises(ParameterError):
        ground_state(25, "open", ChainParams())
    with pytest.raises(ParameterError):
        ground_state(8, "twisted", ChainParams())


def test_pair_index_validation():
    state = ground_state(4, "open", ChainParams())
    with pytest.raises(ParameterError):
        reduced_pair_rho(state, 1, 1)
    with pytest.raises(ParameterError):
        reduced_pair_rho(state, 0, 4)


@pytest.mark.parametrize("N", [3, 4, 5, 6, 7])
@pytest.mark.parametrize("h, T", [(0.0, 0.1), (0.5, 0.5), (1.0, 1.0), (1.5, 0.1), (0.7, 0.0)])
def test_jordan_wigner_is_exact_on_open_chains(N, h, T):
    params = ChainParams(h=h, T=T)
    ens = thermal_state(N, "open", params)
    distances = tuple(range(1, min(4, N - 1) + 1))
    for m, el in free_fermion_finite(N, params, distances=distances).items():
        rho = reduced_pair_rho(ens, *central_pair(N, m))
        assert rho.violations() == []
        ed = rho.elements(m)
        for name in ELEMENTS:
            assert getattr(ed, name) == pytest.approx(getattr(el, name), abs=1e-8)


def test_twelve_site_central_pair_example():
    params = ChainParams(h=0.7, T=0.2)
    ens = thermal_state(12, "open", params)
    el = free_fermion_finite(12, params)[2]
    ed = reduced_pair_rho(ens, *central_pair(12, 2)).elements(2)
    assert max(abs(getattr(ed, k) - getattr(el, k)) for k in ELEMENTS) <= 1e-8


def test_free_fermion_rejects_periodic():
    with pytest.raises(ParameterError):
        free_fermion_finite(8, ChainParams(), bc="periodic")


def test_free_fermion_saturated():
    for el in free_fermion_finite(20, ChainParams(h=2.0)).values():
        assert concurrence_closed(el).value == pytest.approx(0.0, abs=1e-12)


def test_long_chain_converges_to_infinite_chain():
    params = ChainParams(h=0.8, T=0.3)
    finite = central_coefficients(2000, params)
    infinite = correlator_table(4, params).f
    assert np.max(np.abs(finite - infinite)) <= 1e-4


def test_xy_correlations_dominate_at_onset():
    state = ground_state(16, "periodic", ChainParams(h=0.5))
    xx, yy, zz = spin_correlators(state, 0, 2)
    mi, mj = magnetizations(state, 0, 2)
    assert abs(xx) == pytest.approx(abs(yy), abs=1e-12)
    assert abs(xx) > abs(zz - mi * mj)


def test_state_dump_round_trip(tmp_path):
    state = ground_state(10, "periodic", ChainParams(h=0.3))
    path = tmp_path / "gs.bin"
    save_state(state, path)
    back = load_state(path)
    assert (back.N, back.bc, back.sector, back.energy) == (10, "periodic", state.sector, state.energy)
    np.testing.assert_array_equal(back.vector, state.vector)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ParameterError):
        load_state(path)


def test_spin_state_must_be_normalized():
    with pytest.raises(ParameterError):
        SpinState(2, "open", spin_basis(2, 1), np.array([1.0, 1.0]), 0.0)
