"""Qubit-mechanical Hamiltonians and Jaynes-Cummings analytics.

Composite spaces are ordered ``qubit (x) mechanics``. The qubit is projected
onto its two lowest eigenstates ``(|g>, |e>)``; numerically diagonalised
composite Hamiltonians keep the counter-rotating terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .circuits import (
    FluxoniumParams,
    QubitEigensystem,
    TransmonParams,
    diagonalize,
    ej_eff,
    matrix_elements,
)
from .errors import NumericalGuardError, ValidationError
from .operators import Operator, SpaceDims, destroy, eig_hermitian, embed, pauli

HBAR = 1.054571817e-34
H_PLANCK = 6.62607015e-34
E_CHARGE = 1.602176634e-19
FLUX_QUANTUM = H_PLANCK / (2 * E_CHARGE)


def zero_point_amplitude(omega_b: float, mass: float) -> float:
    """``sqrt(hbar / (2 m w))`` in metres, with ``w = 2 pi omega_b`` and omega_b in GHz."""
    return math.sqrt(HBAR / (2 * mass * 2 * math.pi * omega_b * 1e9))


@dataclass(frozen=True)
class MechMode:
    """Mechanical mode: frequency (GHz), Fock truncation and zero-point amplitude (m).

    If ``mass`` (kg) is given, ``x_zpf`` is derived from it.
    """

    omega_b: float
    dim: int
    x_zpf: float = 1e-15
    mass: Optional[float] = None

    def __post_init__(self):
        if self.omega_b <= 0:
            raise ValidationError("mechanical frequency must be positive")
        if self.dim < 2:
            raise ValidationError("mechanical truncation must be >= 2")
        if self.mass is not None:
            if self.mass <= 0:
                raise ValidationError("mass must be positive")
            object.__setattr__(self, "x_zpf", zero_point_amplitude(self.omega_b, self.mass))
        if self.x_zpf <= 0:
            raise ValidationError("x_zpf must be positive")


@dataclass(frozen=True)
class ChargeCoupling:
    g: float

    def __post_init__(self):
        if self.g < 0:
            raise ValidationError("coupling must be non-negative")

    @classmethod
    def from_physical(cls, e_c: float, c_m: float, x_zpf: float) -> "ChargeCoupling":
        """``g = 4 E_C C_m x_0 / e``; ``c_m`` is the induced-charge gradient in C/m."""
        return cls(4 * e_c * c_m * x_zpf / E_CHARGE)


@dataclass(frozen=True)
class FluxCoupling:
    """Motional-flux coupling inputs: field (T), beam length (m), geometric factor, AC bias."""

    b_field: float
    length: float
    beta0: float = 1.0
    phi_ac: float = 0.0
    omega_ac: float = 0.0

    def __post_init__(self):
        if min(self.b_field, self.length, self.beta0, self.phi_ac, self.omega_ac) < 0:
            raise ValidationError("flux-coupling inputs must be non-negative")

    def alpha_x0(self, e_j_max: float, x_zpf: float) -> float:
        """``alpha x_0`` in GHz, with ``alpha = pi E_J^max beta_0 B l / Phi_0``."""
        return math.pi * e_j_max * self.beta0 * self.b_field * self.length * x_zpf / FLUX_QUANTUM


@dataclass(frozen=True)
class JCModel:
    omega_q: float
    omega_b: float
    G: float

    def __post_init__(self):
        if self.G < 0:
            raise ValidationError("JC coupling must be non-negative")

    @property
    def delta(self) -> float:
        return self.omega_q - self.omega_b


def qubit_mech_space(mech: MechMode) -> SpaceDims:
    return SpaceDims((2, mech.dim))


def _two_level(eig: QubitEigensystem, which: str) -> tuple[np.ndarray, np.ndarray]:
    return eig.energies[:2], matrix_elements(eig, which, 2)


def _coupled(energies, elements, mech: MechMode, g: float) -> Operator:
    space = qubit_mech_space(mech)
    b = destroy(mech.dim)
    x = (b + b.dag()).data
    h = np.kron(np.diag(energies), np.eye(mech.dim))
    h = h + mech.omega_b * np.kron(np.eye(2), (b.dag() @ b).data)
    h = h + g * np.kron(elements, x)
    return Operator(0.5 * (h + h.conj().T), space, hermitian=True)


def charge_coupled_hamiltonian(eig: QubitEigensystem, mech: MechMode, coupling: ChargeCoupling) -> Operator:
    """Projected charge coupling ``w_b b^dag b + sum E_i |i><i| + g sum n_ij |i><j| (b + b^dag)``."""
    e, n = _two_level(eig, "charge_n")
    return _coupled(e, n, mech, coupling.g)


def multilevel_charge_hamiltonian(eig: QubitEigensystem, mech: MechMode, g: float, levels: int = 3) -> Operator:
    """Same coupling kept over ``levels`` qubit states, used to quantify leakage out of {g, e}."""
    e = eig.energies[:levels]
    n = matrix_elements(eig, "charge_n", levels)
    b = destroy(mech.dim).data
    h = np.kron(np.diag(e), np.eye(mech.dim)) + mech.omega_b * np.kron(np.eye(levels), b.conj().T @ b)
    h = h + g * np.kron(n, b + b.conj().T)
    return Operator(0.5 * (h + h.conj().T), SpaceDims((levels, mech.dim)), hermitian=True)


def leakage_population(eig: QubitEigensystem, mech: MechMode, g: float) -> float:
    """Largest level-2 weight among the dressed states that continue ``|e,0>`` and ``|g,1>``."""
    h = multilevel_charge_hamiltonian(eig, mech, g, levels=3)
    _, vecs = eig_hermitian(h)
    w = np.abs(vecs) ** 2
    d = mech.dim
    worst = 0.0
    for bare in (1 * d + 0, 0 * d + 1):
        k = int(np.argmax(w[bare]))
        worst = max(worst, float(np.sum(w[2 * d : 3 * d, k])))
    return worst


@dataclass(frozen=True)
class FluxCouplingReport:
    g_single: float
    G_long: float
    G_trans: float
    theta: np.ndarray


FLAVORS = ("transmon_cos_theta", "fluxonium_theta")


def flux_coupled_hamiltonian(
    eig: QubitEigensystem,
    mech: MechMode,
    coupling: FluxCoupling,
    flavor: Optional[str] = None,
    g_override: Optional[float] = None,
) -> tuple[Operator, FluxCouplingReport]:
    """Phase-channel coupling through ``<i|cos theta|j>`` (transmon) or ``<i|theta|j>`` (fluxonium).

    Transmon: ``g_Tm = alpha x_0 sin(pi flux)``; fluxonium:
    ``g_Phi = 2 pi E_L B l x_0 / Phi_0``. ``g_override`` replaces the physical
    single-phonon constant by a value in GHz. The report carries
    ``G_long = g (theta_ee - theta_gg) / 2`` and ``G_trans = g theta_eg``.
    """
    flux = eig.bias.flux
    params = eig.params
    expected = "transmon_cos_theta" if isinstance(params, TransmonParams) else "fluxonium_theta"
    if flavor is not None and flavor != expected:
        raise ValidationError(f"flavor {flavor!r} does not match qubit type (expected {expected!r})")
    if isinstance(params, TransmonParams):
        which = "cos_theta"
        g = coupling.alpha_x0(params.e_j_max, mech.x_zpf) * math.sin(math.pi * flux)
    elif isinstance(params, FluxoniumParams):
        which = "phase_theta"
        g = 2 * math.pi * params.e_l * coupling.b_field * coupling.length * mech.x_zpf / FLUX_QUANTUM
    else:
        raise ValidationError(f"unsupported qubit {type(params).__name__}")
    if g_override is not None:
        g = g_override
    if coupling.b_field == 0 and g_override is None:
        g = 0.0
    e, th = _two_level(eig, which)
    # transmon: the motional term inherits the sign of -E_J cos(theta)
    sign = -1.0 if isinstance(params, TransmonParams) else 1.0
    h = _coupled(e, sign * th, mech, g)
    report = FluxCouplingReport(
        g_single=g,
        G_long=0.5 * g * float(np.real(th[1, 1] - th[0, 0])),
        G_trans=g * float(np.real(th[1, 0])),
        theta=th,
    )
    return h, report


def longitudinal_hamiltonian(omega_q: float, mech: MechMode, G: float) -> Operator:
    """``w_b b^dag b + w_q sz / 2 + G sz (b^dag + b)``."""
    space = qubit_mech_space(mech)
    b = destroy(mech.dim)
    sz = embed(pauli("z"), 0, space)
    x = embed(b + b.dag(), 1, space)
    nb = embed(b.dag() @ b, 1, space)
    return (mech.omega_b * nb + 0.5 * omega_q * sz + G * (sz @ x)).check_hermitian()


def transverse_hamiltonian(omega_q: float, mech: MechMode, G: float) -> Operator:
    """``w_b b^dag b + w_q sz / 2 + G sx (b^dag + b)`` (counter-rotating terms kept)."""
    space = qubit_mech_space(mech)
    b = destroy(mech.dim)
    sz = embed(pauli("z"), 0, space)
    sx = embed(pauli("x"), 0, space)
    x = embed(b + b.dag(), 1, space)
    nb = embed(b.dag() @ b, 1, space)
    return (mech.omega_b * nb + 0.5 * omega_q * sz + G * (sx @ x)).check_hermitian()


def jc_hamiltonian(model: JCModel, dim: int) -> Operator:
    """RWA Jaynes-Cummings Hamiltonian on ``qubit (x) Fock(dim)``."""
    space = SpaceDims((2, dim))
    b = embed(destroy(dim), 1, space)
    sp = embed(pauli("plus"), 0, space)
    sm = embed(pauli("minus"), 0, space)
    sz = embed(pauli("z"), 0, space)
    h = model.omega_b * (b.dag() @ b) + 0.5 * model.omega_q * sz + model.G * (sp @ b + sm @ b.dag())
    return h.check_hermitian()


def excitation_number(dim: int) -> Operator:
    space = SpaceDims((2, dim))
    b = embed(destroy(dim), 1, space)
    sp = embed(pauli("plus"), 0, space)
    return (b.dag() @ b + sp @ sp.dag()).check_hermitian()


def jc_dressed(model: JCModel, n: int) -> tuple[float, float, float]:
    """Dressed energies ``E_+, E_-`` of the ``{|e,n>, |g,n+1>}`` doublet and mixing angle."""
    if n < 0:
        raise ValidationError("excitation index must be >= 0")
    coupling = model.G * math.sqrt(n + 1)
    omega_n = math.sqrt(coupling**2 + (model.delta / 2) ** 2)
    base = model.omega_b * (n + 1)
    theta = 0.5 * math.atan2(2 * coupling, model.delta)
    return base + omega_n, base - omega_n, theta


def jc_evolve(model: JCModel, alpha: complex, beta: complex, t: float, n: int = 0) -> tuple[complex, complex]:
    """Amplitudes on ``(|e,n>, |g,n+1>)`` after time ``t`` (ns).

    Evolution uses the dressed decomposition with angular rates ``2 pi Omega_n``
    and drops the common phase ``exp(-2 pi i w_b (n+1) t)``, so the resonant
    case from ``|e,0>`` gives ``(cos wt, -i sin wt)`` with ``w = 2 pi G``.
    """
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1) > 1e-10:
        raise ValidationError(f"initial amplitudes not normalised (norm^2 = {norm})")
    _, _, th = jc_dressed(model, n)
    omega_n = math.sqrt(model.G**2 * (n + 1) + (model.delta / 2) ** 2)
    c, s = math.cos(th), math.sin(th)
    c_plus = alpha * c + beta * s
    c_minus = -alpha * s + beta * c
    ph = np.exp(-2j * math.pi * omega_n * t)
    ph_m = np.conj(ph)
    amp_e = c_plus * ph * c + c_minus * ph_m * (-s)
    amp_g = c_plus * ph * s + c_minus * ph_m * c
    return complex(amp_e), complex(amp_g)


def jc_visibility(model: JCModel, n: int = 0) -> float:
    """Maximum population swing from ``|e,n>``: ``G^2 (n+1) / Omega_n^2``."""
    coupling2 = model.G**2 * (n + 1)
    return coupling2 / (coupling2 + (model.delta / 2) ** 2)


@dataclass(frozen=True)
class LongitudinalDrive:
    G0: float
    valid: bool
    ratio: float


def modulated_longitudinal_coupling(
    coupling: FluxCoupling, theta_ee: float, theta_gg: float, e_j_max: float, mech: MechMode
) -> LongitudinalDrive:
    """Effective conditional-displacement rate under a weak AC flux bias.

    ``G_0 = (pi phi_ac / 2) alpha x_0 (theta_ee - theta_gg)`` in GHz. Valid when
    ``2 omega_b / G_0 > 100`` (fast-rotating terms negligible).
    """
    if math.pi * coupling.phi_ac >= 0.1:
        raise NumericalGuardError(f"AC bias too strong: pi*phi_ac = {math.pi * coupling.phi_ac:.3g} >= 0.1")
    g0 = 0.5 * math.pi * coupling.phi_ac * coupling.alpha_x0(e_j_max, mech.x_zpf) * (theta_ee - theta_gg)
    ratio = math.inf if g0 == 0 else 2 * mech.omega_b / abs(g0)
    return LongitudinalDrive(g0, ratio > 100, ratio)


# --- avoided crossing -----------------------------------------------------


def resonance_flux(qubit, omega_b: float, lo: float = 0.0, hi: float = 0.5) -> float:
    """Flux in ``[lo, hi]`` where the qubit ``f01`` equals ``omega_b``."""

    def f(x):
        return diagonalize(qubit, x).f01 - omega_b

    if f(lo) * f(hi) > 0:
        raise ValidationError(f"f01 does not cross {omega_b} GHz on flux [{lo}, {hi}]")
    return brentq(f, lo, hi, xtol=1e-13)


@dataclass(frozen=True, eq=False)
class AvoidedCrossing:
    flux: np.ndarray
    branches: np.ndarray  # (points, 2) dressed single-excitation energies above the ground state
    gap: float
    gap_flux: float
    n_ge: float


def single_excitation_branches(h: Operator, mech: MechMode) -> np.ndarray:
    """Two dressed levels continuing ``|e,0>`` and ``|g,1>``, relative to the dressed ground state."""
    vals = np.linalg.eigvalsh(h.data)
    return vals[1:3] - vals[0]


def avoided_crossing(
    qubit: TransmonParams | FluxoniumParams,
    mech: MechMode,
    g: float,
    flux_grid: np.ndarray,
    refine: bool = True,
) -> AvoidedCrossing:
    """Sweep the charge-coupled model over flux and locate the minimum splitting.

    The minimum is refined with a bounded scalar search around the grid
    minimum so the gap is not limited by grid resolution.
    """
    from scipy.optimize import minimize_scalar

    def split(x):
        eig = diagonalize(qubit, x)
        h = charge_coupled_hamiltonian(eig, mech, ChargeCoupling(g))
        br = single_excitation_branches(h, mech)
        return br, eig

    flux_grid = np.asarray(flux_grid, dtype=float)
    branches = np.array([split(x)[0] for x in flux_grid])
    gaps = branches[:, 1] - branches[:, 0]
    k = int(np.argmin(gaps))
    gap, x_min = float(gaps[k]), float(flux_grid[k])
    if refine and len(flux_grid) > 2:
        lo = flux_grid[max(k - 1, 0)]
        hi = flux_grid[min(k + 1, len(flux_grid) - 1)]
        res = minimize_scalar(
            lambda x: float(np.diff(split(x)[0])[0]), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
        )
        if res.fun < gap:
            gap, x_min = float(res.fun), float(res.x)
    n_ge = float(abs(matrix_elements(split(x_min)[1], "charge_n", 2)[0, 1]))
    return AvoidedCrossing(flux_grid, branches, gap, x_min, n_ge)
