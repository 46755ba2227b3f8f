import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from hybridqm import circuits
from hybridqm import qubit_mech as qm
from hybridqm.errors import NumericalGuardError, ValidationError
from hybridqm.operators import basis_ket

TRANSMON = circuits.TransmonParams(5.0, 5.0, 0.5)
FLUXONIUM = circuits.FluxoniumParams(10.0, 1.2, 1.0)


def test_zero_point_amplitude():
    omega_b, mass = 4.5, 1e-15
    expected = math.sqrt(qm.HBAR / (2 * mass * 2 * math.pi * omega_b * 1e9))
    assert qm.zero_point_amplitude(omega_b, mass) == pytest.approx(expected)
    assert qm.MechMode(omega_b, 4, mass=mass).x_zpf == pytest.approx(expected)


def test_charge_coupling_from_physical():
    c = qm.ChargeCoupling.from_physical(0.5, 1e-9, 1e-15)
    assert c.g == pytest.approx(4 * 0.5 * 1e-9 * 1e-15 / qm.E_CHARGE)


@given(
    st.floats(3.0, 6.0),
    st.floats(3.0, 6.0),
    st.floats(1e-4, 0.05),
    st.integers(0, 3),
)
def test_jc_dressed_energies_match_diagonalisation(wq, wb, g, n):
    model = qm.JCModel(wq, wb, g)
    h = qm.jc_hamiltonian(model, n + 3).data
    e_plus, e_minus, _ = qm.jc_dressed(model, n)
    # doublet {|e,n>, |g,n+1>}; the dressed energies include the w_b/2 zero-point term
    sub = h[np.ix_([(n + 3) + n, n + 1], [(n + 3) + n, n + 1])]
    vals = np.linalg.eigvalsh(sub) + 0.5 * wb
    np.testing.assert_allclose(vals, [e_minus, e_plus], atol=1e-10)


@given(st.floats(-0.01, 0.01), st.floats(1e-4, 0.01), st.floats(0, 2000), st.integers(0, 2))
def test_jc_evolve_matches_matrix_exponential(delta, g, t, n):
    model = qm.JCModel(4.5 + delta, 4.5, g)
    dim = n + 3
    h = qm.jc_hamiltonian(model, dim).data
    psi0 = basis_ket((2, dim), (1, n)).data
    psi = expm(-2j * math.pi * h * t) @ psi0
    # remove the doublet's centre phase, as jc_evolve does
    common = np.exp(-2j * math.pi * model.omega_b * (n + 0.5) * t)
    amp_e, amp_g = qm.jc_evolve(model, 1.0, 0.0, t, n)
    assert psi[dim + n] / common == pytest.approx(amp_e, abs=1e-7)
    assert psi[n + 1] / common == pytest.approx(amp_g, abs=1e-7)


def test_resonant_jc_full_transfer_time():
    g = 0.0005
    amp_e, amp_g = qm.jc_evolve(qm.JCModel(4.5, 4.5, g), 1, 0, 1 / (4 * g))
    assert abs(amp_e) ** 2 < 1e-20
    assert abs(amp_g) == pytest.approx(1.0)


@pytest.mark.parametrize("delta, expected", [(0.0, 1.0), (0.002, 0.5)])
def test_jc_visibility(delta, expected):
    assert qm.jc_visibility(qm.JCModel(4.5 + delta, 4.5, 0.001)) == pytest.approx(expected)


def test_jc_evolve_rejects_unnormalised_input():
    with pytest.raises(ValidationError):
        qm.jc_evolve(qm.JCModel(4.5, 4.5, 0.001), 1.0, 1.0, 0.0)


def test_longitudinal_hamiltonian_polaron_shift():
    # exact ground energy of w_b n + w_q sz/2 + G sz x is -w_q/2 - G^2/w_b
    mech = qm.MechMode(1.0, 30)
    h = qm.longitudinal_hamiltonian(4.0, mech, 0.1)
    assert np.linalg.eigvalsh(h.data)[0] == pytest.approx(-2.0 - 0.01, abs=1e-10)


def test_transverse_hamiltonian_is_hermitian_and_couples():
    mech = qm.MechMode(4.5, 4)
    h = qm.transverse_hamiltonian(4.5, mech, 0.01)
    assert h.hermitian
    assert abs(h.data[4 + 0, 1]) == pytest.approx(0.01)


def test_charge_coupled_two_level_gap_equals_2g_nge():
    flux = qm.resonance_flux(circuits.TransmonParams(5, 5, 0.5), 4.5)
    eig = circuits.diagonalize(TRANSMON, flux)
    mech = qm.MechMode(4.5, 4)
    g = 0.001
    h = qm.charge_coupled_hamiltonian(eig, mech, qm.ChargeCoupling(g))
    branch = qm.single_excitation_branches(h, mech)
    n_ge = abs(circuits.matrix_elements(eig, "charge_n", 2)[0, 1])
    assert branch[1] - branch[0] == pytest.approx(2 * g * n_ge, rel=1e-3)


def test_leakage_is_small_for_weak_coupling():
    eig = circuits.diagonalize(TRANSMON, 0.28)
    assert qm.leakage_population(eig, qm.MechMode(4.5, 4), 0.001) < 1e-6


def test_avoided_crossing_gap_linear_in_g():
    mech = qm.MechMode(4.5, 4)
    grid = np.linspace(0.278, 0.284, 41)
    full = qm.avoided_crossing(TRANSMON, mech, 0.001, grid)
    half = qm.avoided_crossing(TRANSMON, mech, 0.0005, grid)
    assert full.gap == pytest.approx(2 * 0.001 * full.n_ge, rel=0.02)
    assert half.gap / full.gap == pytest.approx(0.5, rel=0.01)


def test_fluxonium_coupling_character_changes_with_flux():
    mech = qm.MechMode(8.5, 4)
    coupling = qm.FluxCoupling(0.1, 1e-5)
    _, off = qm.flux_coupled_hamiltonian(circuits.diagonalize(FLUXONIUM, 0.3), mech, coupling)
    _, sweet = qm.flux_coupled_hamiltonian(circuits.diagonalize(FLUXONIUM, 0.5), mech, coupling)
    assert abs(off.G_long) > 10 * abs(off.G_trans)
    assert abs(sweet.G_trans) > 10 * abs(sweet.G_long)


def test_flux_coupling_vanishes_without_field():
    eig = circuits.diagonalize(TRANSMON, 0.2)
    _, rep = qm.flux_coupled_hamiltonian(eig, qm.MechMode(4.5, 3), qm.FluxCoupling(0.0, 1e-5))
    assert rep.g_single == 0.0


def test_flux_coupling_flavor_mismatch():
    eig = circuits.diagonalize(TRANSMON, 0.2)
    with pytest.raises(ValidationError):
        qm.flux_coupled_hamiltonian(eig, qm.MechMode(4.5, 3), qm.FluxCoupling(0.1, 1e-5), flavor="fluxonium_theta")


def test_modulated_coupling_guard_and_validity():
    mech = qm.MechMode(4.5, 4)
    with pytest.raises(NumericalGuardError):
        qm.modulated_longitudinal_coupling(qm.FluxCoupling(0.1, 1e-5, phi_ac=0.05), 0.1, -0.1, 10, mech)
    drive = qm.modulated_longitudinal_coupling(qm.FluxCoupling(0.1, 1e-5, phi_ac=0.01), 0.1, -0.1, 10, mech)
    alpha_x0 = qm.FluxCoupling(0.1, 1e-5).alpha_x0(10, mech.x_zpf)
    assert drive.G0 == pytest.approx(0.5 * math.pi * 0.01 * alpha_x0 * 0.2)
    assert drive.valid


def test_resonance_flux_root():
    x = qm.resonance_flux(TRANSMON, 4.5)
    assert circuits.diagonalize(TRANSMON, x).f01 == pytest.approx(4.5, abs=1e-9)
