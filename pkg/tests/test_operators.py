import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridqm.errors import InvalidDimensionError, TruncationError, ValidationError
from hybridqm.operators import (
    Ket,
    Operator,
    SpaceDims,
    basis_ket,
    coherent,
    coherent_analytic,
    commutator,
    destroy,
    displacement,
    embed,
    fidelity_pure,
    fock,
    identity,
    is_density_matrix,
    log_negativity,
    negativity,
    number,
    parity,
    partial_transpose,
    pauli,
    ptrace,
    tensor,
    thermal_dm,
    wigner,
    wigner_at,
)

amplitudes = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def test_destroy_lowers_fock_states():
    a = destroy(6)
    out = a @ fock(6, 4)
    np.testing.assert_allclose(out.data, 2.0 * fock(6, 3).data)


@pytest.mark.parametrize("dim", [2, 5, 12])
def test_commutator_is_identity_below_cutoff(dim):
    a = destroy(dim)
    c = commutator(a, a.dag()).data
    np.testing.assert_allclose(np.diag(c)[:-1], 1.0)
    assert c[-1, -1] == pytest.approx(1 - dim)


def test_pauli_algebra():
    x, y, z = (pauli(k) for k in "xyz")
    np.testing.assert_allclose((x @ y).data, 1j * z.data, atol=1e-15)
    np.testing.assert_allclose(z.data, np.diag([-1.0, 1.0]))
    np.testing.assert_allclose((pauli("plus") @ basis_ket(SpaceDims((2,)), (0,))).data, [0, 1])


def test_embed_matches_tensor():
    space = SpaceDims((2, 3))
    a = destroy(3)
    np.testing.assert_allclose(embed(a, 1, space).data, tensor(identity(SpaceDims((2,))), a).data)


def test_dimension_mismatch_raises():
    with pytest.raises(InvalidDimensionError):
        destroy(3) + destroy(4)
    with pytest.raises(InvalidDimensionError):
        Ket(np.ones(3), SpaceDims((2,)))


def test_hermitian_flag_is_checked():
    with pytest.raises(ValidationError):
        Operator(destroy(3).data, SpaceDims((3,)), hermitian=True)


@given(amplitudes)
def test_coherent_matches_analytic_and_is_eigenstate(beta):
    dim = 40
    psi = coherent(beta, dim)
    ref = coherent_analytic(beta, dim)
    assert abs(psi.overlap(ref)) ** 2 == pytest.approx(1.0, abs=1e-10)
    mean = np.vdot(psi.data, destroy(dim).data @ psi.data)
    assert mean == pytest.approx(beta, abs=1e-8)


def test_displacement_guard():
    with pytest.raises(TruncationError):
        displacement(3.0, 20)
    displacement(3.0, 20, check=False)


@pytest.mark.parametrize("n_th", [0.0, 0.3, 2.0])
def test_thermal_occupation(n_th):
    rho = thermal_dm(60, n_th)
    assert is_density_matrix(rho)
    assert number(60).expect(rho).real == pytest.approx(n_th, rel=1e-8, abs=1e-12)


def test_parity_of_fock_states():
    p = parity(5)
    for n in range(5):
        assert p.expect(fock(5, n).dm()).real == (-1) ** n


def _bell():
    space = SpaceDims((2, 2))
    return Ket((basis_ket(space, (0, 0)).data + basis_ket(space, (1, 1)).data) / math.sqrt(2), space)


def test_partial_trace_of_bell_state_is_mixed():
    red = ptrace(_bell().dm(), [0])
    np.testing.assert_allclose(red.data, 0.5 * np.eye(2), atol=1e-15)


def test_bell_state_negativity():
    rho = _bell().dm()
    assert negativity(rho) == pytest.approx(0.5)
    assert log_negativity(rho) == pytest.approx(1.0)


@given(st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_product_states_have_zero_negativity(phi, theta):
    space = SpaceDims((2, 3))
    q = np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])
    m = coherent(0.3 * np.exp(1j * phi), 3).normalized().data
    rho = Ket(np.kron(q, m), space).dm()
    assert log_negativity(rho) == pytest.approx(0.0, abs=1e-10)


def test_partial_transpose_preserves_trace():
    rho = _bell().dm()
    assert partial_transpose(rho, [1]).tr() == pytest.approx(1.0)


def test_fidelity_pure():
    assert fidelity_pure(fock(3, 1), fock(3, 1)) == pytest.approx(1.0)
    assert fidelity_pure(fock(3, 1), fock(3, 2).dm()) == pytest.approx(0.0)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_wigner_fock_origin(n):
    assert wigner_at(fock(10, n).dm(), 0j) == pytest.approx((-1) ** n * 2 / math.pi)


@given(st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False), st.integers(0, 3))
def test_wigner_methods_agree(alpha, n):
    rho = fock(8, n).dm()
    assert wigner_at(rho, alpha) == pytest.approx(wigner_at(rho, alpha, method="parity", pad=40), abs=1e-9)


def test_wigner_coherent_gaussian_and_normalised():
    beta = 1.0 + 0.5j
    x = np.linspace(-4, 5, 121)
    p = np.linspace(-4, 5, 121)
    w = wigner(coherent(beta, 30), x, p)
    assert w.accurate and w.integral == pytest.approx(1.0, abs=1e-6)
    xx, pp = np.meshgrid(x, p)
    ref = (2 / math.pi) * np.exp(-2 * np.abs(xx + 1j * pp - beta) ** 2)
    np.testing.assert_allclose(w.values, ref, atol=1e-10)


def test_wigner_warns_on_small_grid():
    with pytest.warns(UserWarning):
        w = wigner(coherent(2.0, 30), np.linspace(-1, 1, 11), np.linspace(-1, 1, 11))
    assert not w.accurate
