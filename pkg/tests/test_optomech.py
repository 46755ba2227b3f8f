import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridqm import optomech as om
from hybridqm.errors import ValidationError


def _params(**kw):
    args = dict(omega_a=5.05, omega_d=5.0, omega_b=1.0, g_single=1e-3, kappa=0.02, kappa1=0.01, epsilon=1.0)
    args.update(kw)
    return om.OptoParams(**args)


def test_kappa_bookkeeping():
    p = _params()
    assert p.kappa2 == pytest.approx(0.01)
    assert p.kappa_total == pytest.approx(0.03)
    with pytest.raises(ValidationError):
        _params(kappa1=0.05)


def test_uncoupled_cavity_closed_form():
    p = _params(g_single=0.0)
    s = om.classical_steady(p)
    expected = -1j * p.epsilon / (p.kappa_total / 2 + 1j * p.delta_a)
    assert s.alpha == pytest.approx(expected)
    assert s.beta == 0


@given(st.floats(0.1, 2.0), st.floats(-0.3, 0.3))
def test_classical_steady_state_solves_equations(eps, det):
    s = om.classical_steady(_params(omega_a=5.0 + det, epsilon=eps))
    assert s.residual < 1e-9 * max(1.0, abs(s.alpha), abs(s.beta))


def test_bistability_reports_all_roots():
    p = _params(epsilon=3.0)
    s = om.classical_steady(p)
    assert s.bistable and len(s.roots) == 3
    for x in s.roots:
        alpha = -1j * p.epsilon / (p.kappa_total / 2 + 1j * (p.delta_a + p.g_single * x))
        beta = -1j * p.g_single * abs(alpha) ** 2 / (1j * p.omega_b)
        assert 2 * beta.real == pytest.approx(x, rel=1e-9)


@pytest.mark.parametrize("flavor", ["longitudinal", "transverse_rwa"])
def test_linearize_uses_enhanced_coupling(flavor):
    p = _params(epsilon=10.0, omega_a=5.3)
    lin = om.linearize(p, 4.0, 0.002, flavor, dims=(3, 3))
    assert lin.G_alpha == pytest.approx(p.g_single * abs(lin.alpha))
    assert lin.hamiltonian.hermitian
    if flavor == "longitudinal":
        assert lin.omega_q == pytest.approx(4.0 + 2 * 0.002 * 2 * lin.beta.real)
    else:
        assert lin.dropped_drive == pytest.approx(abs(0.002 * 2 * lin.beta.real))


def test_linearize_warns_for_weak_field():
    with pytest.warns(UserWarning):
        om.linearize(_params(epsilon=0.01, omega_a=5.5), 4.0, 0.002, "longitudinal", dims=(2, 2))


@given(st.floats(1e-4, 0.01))
def test_beam_splitter_oracle_matches_two_mode_evolution(g):
    t_star = om.beam_splitter_oracle(g)
    assert t_star == pytest.approx(math.pi / (2 * 2 * math.pi * g))
    a, b = om.beam_splitter_amplitudes(0.0, 1.0, g, t_star)
    assert abs(a) == pytest.approx(1.0, abs=1e-12)
    assert abs(b) == pytest.approx(0.0, abs=1e-12)


def test_lossless_transduction():
    rep = om.transduce(0.002, 0.001)
    assert rep.fidelity > 0.999
    assert rep.t2 == pytest.approx(rep.t2_oracle, rel=1e-3)
    assert rep.t1 == pytest.approx(rep.t1_oracle, rel=1e-3)


def test_transduction_fidelity_drops_with_cavity_loss():
    clean = om.transduce(0.002, 0.001, t1=125.0, t2=250.0).fidelity
    lossy = om.transduce(0.002, 0.001, t1=125.0, t2=250.0, losses=om.TransductionLosses(kappa=1e-4)).fidelity
    assert lossy < clean


def test_beam_splitter_trace_swaps_populations():
    times = np.linspace(0, 250, 6)
    n_b, n_a = om.beam_splitter_trace(0.001, times)
    np.testing.assert_allclose(n_a + n_b, 1.0, atol=1e-12)
    assert n_a[-1] == pytest.approx(1.0, abs=1e-9)


def test_optical_readout_distinguishes_encoding_sign():
    ro = om.longitudinal_readout_via_optics(1.5j, 0.001, np.linspace(0, 500, 201))
    assert ro.contrast > 0.5
    assert om.readout_decision(ro.photons_g[np.argmin(abs(ro.times - ro.t_bright_g))], 1.0) == "g"


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
def test_red_sideband_cools_blue_heats(omega):
    kappa = 0.1
    red = om.cooling_rates(0.0, 0.001, (0.01, 0.0), (kappa, -omega), omega)
    blue = om.cooling_rates(0.0, 0.001, (0.01, 0.0), (kappa, omega), omega)
    assert red.cools and red.ratio > 1
    assert not blue.cools and blue.ratio < 1
    expected = ((kappa / 2) ** 2 + (2 * omega) ** 2) / (kappa / 2) ** 2
    assert red.ratio == pytest.approx(expected)


def test_qubit_channel_adds_to_rates():
    only_cavity = om.cooling_rates(0.0, 0.001, (0.01, -1.0), (0.1, -1.0), 1.0)
    both = om.cooling_rates(0.002, 0.001, (0.01, -1.0), (0.1, -1.0), 1.0)
    assert both.gamma_minus > only_cavity.gamma_minus


def test_sideband_lindblad_cross_check():
    def phonons(det):
        return om.sideband_cooling_phonons(om.sideband_cooling_model(1.0, 0.02, det, 0.2, 1e-4, 1.0, dims=(8, 3)))

    assert phonons(-1.0) < 1.0 < phonons(1.0)
