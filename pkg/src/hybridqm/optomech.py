"""Electro-optomechanics: classical steady state, linearised models, transduction and cooling rates.

Composite ordering is ``qubit (x) mechanics (x) cavity``. Time-domain
models work in the frame rotating at the mechanical frequency, where the
red-sideband beam splitter and the resonant qubit exchange are static.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq, minimize_scalar

from .dynamics import Channel, LindbladModel, TimeGrid, lindblad_evolve, steady_state
from .errors import NumericalGuardError, ValidationError
from .operators import Operator, SpaceDims, basis_ket, destroy, embed, pauli, ptrace, number

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class OptoParams:
    """Driven optical cavity coupled radiation-pressure style to a mechanical mode.

    ``kappa = kappa1 + kappa2`` (total = input port + intrinsic port). The
    classical field decays at ``(kappa + kappa1) / 2``, stored as
    :attr:`kappa_total`.
    """

    omega_a: float
    omega_d: float
    omega_b: float
    g_single: float
    kappa: float
    kappa1: float
    epsilon: float
    gamma_m: float = 0.0
    kappa2: Optional[float] = None

    def __post_init__(self):
        if min(self.kappa, self.kappa1, self.gamma_m, self.g_single) < 0:
            raise ValidationError("rates and coupling must be non-negative")
        if self.omega_b <= 0:
            raise ValidationError("mechanical frequency must be positive")
        if self.kappa1 > self.kappa:
            raise ValidationError("kappa1 cannot exceed kappa")
        if self.kappa2 is None:
            object.__setattr__(self, "kappa2", self.kappa - self.kappa1)
        elif abs(self.kappa1 + self.kappa2 - self.kappa) > 1e-12 * max(1.0, self.kappa):
            raise ValidationError("kappa must equal kappa1 + kappa2")

    @property
    def delta_a(self) -> float:
        return self.omega_a - self.omega_d

    @property
    def kappa_total(self) -> float:
        return self.kappa + self.kappa1


@dataclass(frozen=True)
class ClassicalSteady:
    alpha: complex
    beta: complex
    residual: float
    roots: tuple[float, ...]  # all self-consistent values of beta + beta^*
    bistable: bool


def _cavity_amplitude(p: OptoParams, x: float) -> complex:
    return -1j * p.epsilon / (p.kappa_total / 2 + 1j * (p.delta_a + p.g_single * x))


def _mech_amplitude(p: OptoParams, n_phot: float) -> complex:
    return -1j * p.g_single * n_phot / (p.gamma_m / 2 + 1j * p.omega_b)


def classical_residuals(p: OptoParams, alpha: complex, beta: complex) -> tuple[float, float]:
    """Right-hand sides of the classical amplitude equations at ``(alpha, beta)``."""
    x = 2 * beta.real
    ra = -(p.kappa_total / 2 + 1j * (p.delta_a + p.g_single * x)) * alpha - 1j * p.epsilon
    rb = -(p.gamma_m / 2 + 1j * p.omega_b) * beta - 1j * p.g_single * abs(alpha) ** 2
    return abs(ra), abs(rb)


def classical_steady(p: OptoParams, max_iter: int = 10000, tol: float = 1e-12, scan: int = 4001) -> ClassicalSteady:
    """Self-consistent classical fixed point.

    ``beta`` only feeds back through ``x = beta + beta^*``, so the fixed point
    reduces to the scalar equation ``x = c |alpha(x)|^2``. All roots are
    bracketed on a scan and polished with Brent's method; a damped
    fixed-point iteration from ``x = 0`` selects the branch reported when
    the system is bistable.
    """
    if p.epsilon == 0:
        return ClassicalSteady(0j, 0j, 0.0, (0.0,), False)
    c = 2 * _mech_amplitude(p, 1.0).real

    def f(x):
        return x - c * abs(_cavity_amplitude(p, x)) ** 2

    bound = abs(c) * (p.epsilon / (p.kappa_total / 2)) ** 2 * 1.01 + 1e-300
    xs = np.linspace(-bound, bound, scan)
    fs = np.array([f(x) for x in xs])
    roots = []
    for i in range(scan - 1):
        if fs[i] == 0:
            roots.append(float(xs[i]))
        elif fs[i] * fs[i + 1] < 0:
            roots.append(brentq(f, xs[i], xs[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
    if not roots:
        roots = [0.0] if c == 0 else []
    x = 0.0
    converged = False
    for _ in range(max_iter):
        nxt = c * abs(_cavity_amplitude(p, x)) ** 2
        if abs(nxt - x) <= tol * max(1.0, abs(x)):
            x = nxt
            converged = True
            break
        x = 0.5 * (x + nxt)
    if roots:
        x = min(roots, key=lambda r: abs(r - x))
    elif not converged:
        raise NumericalGuardError("classical steady state did not converge and no root was bracketed")
    alpha = _cavity_amplitude(p, x)
    beta = _mech_amplitude(p, abs(alpha) ** 2)
    res = max(classical_residuals(p, alpha, beta))
    return ClassicalSteady(alpha, beta, res, tuple(roots), len(roots) > 1)


# --- linearisation ----------------------------------------------------------


FLAVORS = ("longitudinal", "transverse_rwa")


@dataclass(frozen=True, eq=False)
class LinearizedModel:
    flavor: str
    alpha: complex
    beta: complex
    G_alpha: float
    delta: float  # shifted cavity detuning
    omega_q: float  # qubit frequency including the static mechanical shift
    dropped_drive: float  # magnitude of the neglected G_tm (beta + beta^*) sx term
    hamiltonian: Operator


def linearize(
    p: OptoParams,
    omega_q: float,
    coupling: float,
    flavor: str,
    dims: tuple[int, int] = (6, 6),
    steady: Optional[ClassicalSteady] = None,
) -> LinearizedModel:
    """Three-mode Hamiltonian for the fluctuations around the classical state.

    ``longitudinal``: ``w_q sz / 2 + w_b n_b + Delta n_a + G_L sz (b + b^dag) + G_a (a + a^dag)(b + b^dag)``
    with ``w_q`` shifted by ``2 G_L (beta + beta^*)``.

    ``transverse_rwa``: ``w_q sz / 2 + w_b n_b + Delta n_a + G_tm (b^dag s- + b s+) + G_a (a^dag b + a b^dag)``;
    the static drive ``G_tm (beta + beta^*) sx`` is dropped and its size reported.
    """
    if flavor not in FLAVORS:
        raise ValidationError(f"flavor must be one of {FLAVORS}")
    if coupling < 0:
        raise ValidationError("coupling must be non-negative")
    st = steady or classical_steady(p)
    if abs(st.alpha) < 10 and p.g_single > 0 and p.epsilon > 0:
        warnings.warn(f"|alpha| = {abs(st.alpha):.3g} < 10: linearisation may be poor", stacklevel=2)
    x = 2 * st.beta.real
    g_alpha = p.g_single * abs(st.alpha)
    delta = p.delta_a + p.g_single * x
    nm, nc = dims
    space = SpaceDims((2, nm, nc))
    b = embed(destroy(nm), 1, space)
    a = embed(destroy(nc), 2, space)
    sz = embed(pauli("z"), 0, space)
    base = p.omega_b * (b.dag() @ b) + delta * (a.dag() @ a)
    if flavor == "longitudinal":
        wq = omega_q + 2 * coupling * x
        h = 0.5 * wq * sz + base + coupling * (sz @ (b + b.dag())) + g_alpha * ((a + a.dag()) @ (b + b.dag()))
        dropped = 0.0
    else:
        wq = omega_q
        sp_ = embed(pauli("plus"), 0, space)
        sm = embed(pauli("minus"), 0, space)
        h = 0.5 * wq * sz + base + coupling * (b.dag() @ sm + b @ sp_) + g_alpha * (a.dag() @ b + a @ b.dag())
        dropped = abs(coupling * x)
    return LinearizedModel(flavor, st.alpha, st.beta, g_alpha, delta, wq, dropped, h.check_hermitian())


# --- transduction -------------------------------------------------------------


@dataclass(frozen=True)
class TransductionLosses:
    gamma: float = 0.0
    gamma_m: float = 0.0
    kappa: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        if min(self.gamma, self.gamma_m, self.kappa, self.n_th) < 0:
            raise ValidationError("loss rates must be non-negative")

    @property
    def lossless(self) -> bool:
        return self.gamma == self.gamma_m == self.kappa == 0


def _swap_ops(dims):
    space = SpaceDims((2,) + tuple(dims))
    b = embed(destroy(dims[0]), 1, space)
    a = embed(destroy(dims[1]), 2, space)
    sp_ = embed(pauli("plus"), 0, space)
    sm = embed(pauli("minus"), 0, space)
    sz = embed(pauli("z"), 0, space)
    return space, b, a, sp_, sm, sz


def stage_hamiltonians(g_tm: float, g_alpha: float, dims=(3, 3), detuning: Optional[float] = None):
    """Stage Hamiltonians in the frame rotating at ``omega_b``.

    Stage 1: resonant qubit-mechanics exchange, beam splitter off. Stage 2:
    beam splitter on; the qubit exchange is removed (``detuning=None``) or
    kept with the qubit detuned by ``detuning``.
    """
    space, b, a, sp_, sm, sz = _swap_ops(dims)
    jc = g_tm * (b.dag() @ sm + b @ sp_)
    bs = g_alpha * (a.dag() @ b + a @ b.dag())
    h1 = jc.check_hermitian()
    h2 = bs if detuning is None else bs + jc + 0.5 * detuning * sz
    return h1, h2.check_hermitian()


def _stage_model(h: Operator, losses: TransductionLosses, dims) -> LindbladModel:
    space, b, a, _, sm, _ = _swap_ops(dims)
    chans = (Channel(sm, losses.gamma), Channel(a, losses.kappa))
    return LindbladModel(h, chans, losses.n_th, b, losses.gamma_m)


def _evolve(h: Operator, rho: np.ndarray, t: float, losses: TransductionLosses, dims) -> np.ndarray:
    if t <= 0:
        return rho
    if losses.lossless:
        u = expm(-1j * TWO_PI * t * h.data)
        return u @ rho @ u.conj().T
    model = _stage_model(h, losses, dims)
    traj = lindblad_evolve(model, Operator(rho, h.space), TimeGrid(0.0, t, 2))
    return traj.states[-1]


@dataclass(frozen=True)
class TransductionReport:
    t1: float
    t2: float
    fidelity: float  # population of |g, 0_m, 1_a> starting from |e, 0, 0>
    superposition_fidelity: float  # |+> mapped to (|0> + e^{i phi}|1>)/sqrt2 with the known swap phase removed
    t1_oracle: float
    t2_oracle: float


def beam_splitter_oracle(g_alpha: float) -> float:
    """First complete single-excitation swap: ``pi / (2 w)`` with ``w = 2 pi G_alpha``."""
    return math.pi / (2 * TWO_PI * g_alpha)


def _optimise_time(func, t_guess: float) -> float:
    res = minimize_scalar(
        lambda t: -func(t), bounds=(0.5 * t_guess, 1.5 * t_guess), method="bounded", options={"xatol": 1e-10 * t_guess}
    )
    return float(res.x)


def transduce(
    g_tm: float,
    g_alpha: float,
    t1: Optional[float] = None,
    t2: Optional[float] = None,
    losses: TransductionLosses = TransductionLosses(),
    dims=(3, 3),
    detuning: Optional[float] = None,
) -> TransductionReport:
    """Double swap qubit -> mechanics -> optics.

    Missing stage times are optimised numerically on the lossless model
    (stage 1 maximises the mechanical excitation, stage 2 the optical one)
    and then used with the requested losses.
    """
    if g_tm <= 0 or g_alpha <= 0:
        raise ValidationError("both swap couplings must be positive")
    h1, h2 = stage_hamiltonians(g_tm, g_alpha, dims, detuning)
    space = h1.space
    e00 = basis_ket(space, (1, 0, 0)).dm().data
    g10 = basis_ket(space, (0, 1, 0)).dm().data
    g01 = basis_ket(space, (0, 0, 1))
    lossless = TransductionLosses()
    pop_m = lambda rho: float(np.real(np.trace(g10 @ rho)))  # noqa: E731
    if t1 is None:
        t1 = _optimise_time(lambda t: pop_m(_evolve(h1, e00, t, lossless, dims)), beam_splitter_oracle(g_tm))
    if t2 is None:
        start = basis_ket(space, (0, 1, 0)).dm().data
        t2 = _optimise_time(
            lambda t: float(np.real(np.vdot(g01.data, _evolve(h2, start, t, lossless, dims) @ g01.data))),
            beam_splitter_oracle(g_alpha),
        )

    def run(rho):
        return _evolve(h2, _evolve(h1, rho, t1, losses, dims), t2, losses, dims)

    fid = float(np.real(np.vdot(g01.data, run(e00) @ g01.data)))
    plus = (basis_ket(space, (0, 0, 0)).data + basis_ket(space, (1, 0, 0)).data) / math.sqrt(2)
    # each resonant swap contributes -i, so the target is (|0> - |1>)/sqrt2 on the optics
    target = (basis_ket(space, (0, 0, 0)).data - basis_ket(space, (0, 0, 1)).data) / math.sqrt(2)
    rho_out = run(np.outer(plus, plus.conj()))
    sfid = float(np.real(np.vdot(target, rho_out @ target)))
    return TransductionReport(t1, t2, fid, sfid, beam_splitter_oracle(g_tm), beam_splitter_oracle(g_alpha))


def beam_splitter_trace(g_alpha: float, times: Sequence[float], dims=(3, 3)) -> tuple[np.ndarray, np.ndarray]:
    """``(<b^dag b>, <a^dag a>)`` from ``|g, 1_m, 0_a>`` under the stage-2 model."""
    _, h2 = stage_hamiltonians(1.0, g_alpha, dims)
    space, b, a, *_ = _swap_ops(dims)
    psi0 = basis_ket(space, (0, 1, 0)).data
    nb, na = [], []
    for t in times:
        psi = expm(-1j * TWO_PI * t * h2.data) @ psi0
        nb.append(np.real(np.vdot(psi, (b.dag() @ b).data @ psi)))
        na.append(np.real(np.vdot(psi, (a.dag() @ a).data @ psi)))
    return np.array(nb), np.array(na)


def transfer_trace(
    g_tm: float, g_alpha: float, t1: float, times: Sequence[float], dims=(3, 3), losses: TransductionLosses = TransductionLosses()
) -> dict[str, np.ndarray]:
    """``P_e``, ``<b^dag b>`` and ``<a^dag a>`` along the two-stage protocol from ``|e, 0, 0>``.

    Stage 1 runs on ``[0, t1]``; stage 2 afterwards.
    """
    h1, h2 = stage_hamiltonians(g_tm, g_alpha, dims)
    space, b, a, _, _, sz = _swap_ops(dims)
    ops = {"p_e": 0.5 * (sz + 1), "n_b": b.dag() @ b, "n_a": a.dag() @ a}
    rho0 = basis_ket(space, (1, 0, 0)).dm().data
    rho1 = _evolve(h1, rho0, t1, losses, dims)
    out = {k: [] for k in ops}
    for t in times:
        rho = _evolve(h1, rho0, t, losses, dims) if t <= t1 else _evolve(h2, rho1, t - t1, losses, dims)
        for k, op in ops.items():
            out[k].append(float(np.real(np.trace(op.data @ rho))))
    return {k: np.array(v) for k, v in out.items()}


# --- longitudinal readout through the optics -------------------------------------


@dataclass(frozen=True, eq=False)
class OpticalReadout:
    times: np.ndarray
    photons_g: np.ndarray
    photons_e: np.ndarray
    t_bright_g: float  # sampling time at which g gives photons and e none
    t_bright_e: float
    contrast: float  # (n_g - n_e) / (n_g + n_e) at t_bright_g


def beam_splitter_amplitudes(a0: complex, b0: complex, g_alpha: float, t) -> tuple[np.ndarray, np.ndarray]:
    """Classical rotation ``a(t) = a0 cos wt - i b0 sin wt``, ``b(t) = b0 cos wt - i a0 sin wt``."""
    wt = TWO_PI * g_alpha * np.asarray(t, dtype=float)
    return a0 * np.cos(wt) - 1j * b0 * np.sin(wt), b0 * np.cos(wt) - 1j * a0 * np.sin(wt)


def longitudinal_readout_via_optics(
    beta_enc: complex, g_alpha: float, times: Sequence[float], reference: Optional[complex] = None
) -> OpticalReadout:
    """Photon number after the mechanics (holding ``+-beta_enc``) swaps into a reference-loaded cavity.

    ``beta_enc`` is the amplitude of the ``g`` branch. The default
    reference is the in-phase amplitude ``|beta_enc|``, so at
    ``w t = pi/4`` the ``g`` branch interferes constructively and ``e``
    destructively; at ``3 pi / 4`` the roles swap.
    """
    if g_alpha <= 0:
        raise ValidationError("G_alpha must be positive")
    times = np.asarray(times, dtype=float)
    a0 = abs(beta_enc) if reference is None else reference
    ng = np.abs(beam_splitter_amplitudes(a0, beta_enc, g_alpha, times)[0]) ** 2
    ne = np.abs(beam_splitter_amplitudes(a0, -beta_enc, g_alpha, times)[0]) ** 2
    w = TWO_PI * g_alpha
    tg, te = math.pi / (4 * w), 3 * math.pi / (4 * w)
    cg = abs(beam_splitter_amplitudes(a0, beta_enc, g_alpha, tg)[0]) ** 2
    ce = abs(beam_splitter_amplitudes(a0, -beta_enc, g_alpha, tg)[0]) ** 2
    contrast = 0.0 if cg + ce == 0 else float((cg - ce) / (cg + ce))
    return OpticalReadout(times, ng, ne, tg, te, contrast)


def readout_decision(photons: float, threshold: float, at_bright_g: bool = True) -> str:
    """Map a photon-number sample to the qubit state using the timing table."""
    present = photons > threshold
    return ("g" if present else "e") if at_bright_g else ("e" if present else "g")


# --- sideband cooling rates ------------------------------------------------------


def lorentzian_density(omega, linewidth: float, detuning: float):
    """``S(w) = k / ((k/2)^2 + (detuning + w)^2)`` with ``detuning = drive - resonance``."""
    return linewidth / ((linewidth / 2) ** 2 + (detuning + np.asarray(omega)) ** 2)


@dataclass(frozen=True)
class CoolingRates:
    gamma_minus: float
    gamma_plus: float

    @property
    def cools(self) -> bool:
        return self.gamma_minus > self.gamma_plus

    @property
    def ratio(self) -> float:
        return math.inf if self.gamma_plus == 0 else self.gamma_minus / self.gamma_plus


def cooling_rates(
    g_l: float,
    g_alpha: float,
    qubit: tuple[float, float],
    cavity: tuple[float, float],
    omega: float,
) -> CoolingRates:
    """Golden-rule rates ``Gamma_- = G_L^2 S_zz(W) + G_a^2 S_aa(W)``, ``Gamma_+`` at ``-W``.

    ``qubit`` and ``cavity`` are ``(linewidth, detuning)`` pairs with the
    detuning measured as drive minus resonance, so the red sideband is
    ``detuning = -W``.
    """
    (gq, dq), (kc, dc) = qubit, cavity
    if min(gq, kc) <= 0:
        raise ValidationError("linewidths must be positive")

    def rate(w):
        return g_l**2 * float(lorentzian_density(w, gq, dq)) + g_alpha**2 * float(lorentzian_density(w, kc, dc))

    return CoolingRates(rate(omega), rate(-omega))


def sideband_cooling_model(
    omega_b: float, g_alpha: float, drive_detuning: float, kappa: float, gamma_m: float, n_th: float, dims=(10, 4)
) -> LindbladModel:
    """Linearised cavity-mechanics model (no RWA) for cross-checking :func:`cooling_rates`.

    In the drive frame the cavity sits at ``-drive_detuning``.
    """
    nm, nc = dims
    space = SpaceDims((nm, nc))
    b = embed(destroy(nm), 0, space)
    a = embed(destroy(nc), 1, space)
    h = omega_b * (b.dag() @ b) - drive_detuning * (a.dag() @ a) + g_alpha * ((a + a.dag()) @ (b + b.dag()))
    return LindbladModel(h.check_hermitian(), (Channel(a, kappa),), n_th, b, gamma_m)


def sideband_cooling_phonons(model: LindbladModel) -> float:
    rho = steady_state(model)
    nm = model.space.dims[0]
    return float(number(nm).expect(ptrace(rho, [0])).real)
