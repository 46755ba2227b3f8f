"""Open-system dynamics: Lindblad integration, steady states and spectroscopy.

Frequencies and rates are both in GHz (``f = omega / 2 pi``), so every
generator below carries an overall ``2 pi``:

    d rho / dt = 2 pi ( -i [H, rho] + sum_k r_k D[L_k] rho ),   t in ns.

An amplitude-damping channel of rate ``gamma`` therefore gives
``P_e(t) = exp(-2 pi gamma t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.signal import find_peaks
from scipy.sparse.linalg import spsolve

from .circuits import TransmonParams, diagonalize, matrix_elements
from .errors import IntegrationError, InvalidDimensionError, ValidationError
from .operators import (
    Ket,
    Operator,
    SpaceDims,
    basis_ket,
    destroy,
    embed,
    hermitian_residual,
    log_negativity,
    pauli,
)
from .qubit_mech import JCModel, MechMode

TWO_PI = 2 * math.pi
DEFAULT_STEP_FRACTION = 50
POSITIVITY_FLOOR = -1e-6
TRACE_DRIFT_LIMIT = 1e-4


@dataclass(frozen=True)
class Channel:
    op: Operator
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValidationError(f"channel rate must be >= 0, got {self.rate}")


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus dissipators.

    ``thermal_mode`` with ``gamma_m`` adds the pair ``gamma_m (n_th + 1) D[b]``
    and ``gamma_m n_th D[b^dag]`` on top of ``channels``.
    """

    hamiltonian: Operator
    channels: tuple = ()
    n_th: float = 0.0
    thermal_mode: Optional[Operator] = None
    gamma_m: float = 0.0

    def __post_init__(self):
        chans = tuple(c if isinstance(c, Channel) else Channel(*c) for c in self.channels)
        object.__setattr__(self, "channels", chans)
        if self.n_th < 0 or self.gamma_m < 0:
            raise ValidationError("n_th and gamma_m must be non-negative")
        space = self.hamiltonian.space
        ops = [c.op for c in chans] + ([self.thermal_mode] if self.thermal_mode is not None else [])
        for op in ops:
            if op.space != space:
                raise InvalidDimensionError(f"channel acts on {op.dims}, model is {space.dims}")

    @property
    def space(self) -> SpaceDims:
        return self.hamiltonian.space

    def all_channels(self) -> list[Channel]:
        chans = list(self.channels)
        if self.thermal_mode is not None and self.gamma_m > 0:
            b = self.thermal_mode
            chans.append(Channel(b, self.gamma_m * (self.n_th + 1)))
            if self.n_th > 0:
                chans.append(Channel(b.dag(), self.gamma_m * self.n_th))
        return [c for c in chans if c.rate > 0]

    def frequency_scale(self) -> float:
        """Largest generator frequency (GHz): Hamiltonian spread plus total decay strength."""
        vals = np.linalg.eigvalsh(self.hamiltonian.data)
        scale = float(vals[-1] - vals[0])
        for c in self.all_channels():
            scale += c.rate * float(np.linalg.norm(c.op.data, 2)) ** 2
        return max(scale, 1e-12)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    steps: int

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValidationError("time grid needs t1 > t0")
        if self.steps < 2:
            raise ValidationError("time grid needs at least 2 points")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.steps)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, d, d)
    space: SpaceDims
    dt: float
    trace_drift: float  # largest raw |Tr rho - 1| seen after any single step
    hermitian_residual: float
    min_eigenvalue: float

    def rho(self, k: int) -> Operator:
        return Operator(self.states[k], self.space)

    def expect(self, op: Operator) -> np.ndarray:
        return np.real(np.einsum("ij,tji->t", op.data, self.states))


def _effective(model: LindbladModel):
    chans = model.all_channels()
    ls = [math.sqrt(c.rate) * c.op.data for c in chans]
    heff = model.hamiltonian.data.astype(complex)
    for l in ls:
        heff = heff - 0.5j * (l.conj().T @ l)
    return heff, ls


def lindblad_rhs(model: LindbladModel):
    heff, ls = _effective(model)
    heff_dag = heff.conj().T

    def rhs(rho):
        out = -1j * (heff @ rho - rho @ heff_dag)
        for l in ls:
            out += l @ rho @ l.conj().T
        return TWO_PI * out

    return rhs


def _as_dm(rho0, space: SpaceDims) -> np.ndarray:
    if isinstance(rho0, Ket):
        rho0 = rho0.dm()
    if rho0.space != space:
        raise InvalidDimensionError(f"initial state on {rho0.dims}, model is {space.dims}")
    data = np.array(rho0.data, dtype=complex)
    if abs(np.trace(data) - 1) > 1e-9 or hermitian_residual(data) > 1e-10:
        raise ValidationError("initial state is not a normalised Hermitian density matrix")
    return data


def lindblad_evolve(
    model: LindbladModel,
    rho0,
    grid: TimeGrid,
    dt: Optional[float] = None,
    step_fraction: float = DEFAULT_STEP_FRACTION,
) -> Trajectory:
    """Fixed-step RK4 integration sampled on ``grid``.

    The default step is ``1 / (step_fraction * f_max)`` with ``f_max`` the
    angular scale ``2 pi`` times :meth:`LindbladModel.frequency_scale`; each output interval is split into
    equal substeps no longer than that. After every step the state is
    symmetrised and renormalised; the raw drift is tracked and a single-step
    drift above ``1e-4`` aborts.
    """
    space = model.space
    rho = _as_dm(rho0, space)
    times = grid.times
    if dt is None:
        dt = 1.0 / (step_fraction * TWO_PI * model.frequency_scale())
    interval = times[1] - times[0]
    nsub = max(1, math.ceil(interval / dt - 1e-9))
    h = interval / nsub
    rhs = lindblad_rhs(model)

    out = np.empty((len(times),) + rho.shape, dtype=complex)
    out[0] = rho
    drift = 0.0
    herm = 0.0
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    for k in range(1, len(times)):
        for _ in range(nsub):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * h * k1)
            k3 = rhs(rho + 0.5 * h * k2)
            k4 = rhs(rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            herm = max(herm, hermitian_residual(rho))
            rho = 0.5 * (rho + rho.conj().T)
            tr = np.trace(rho).real
            step_drift = abs(tr - 1.0)
            if not np.isfinite(tr) or step_drift > TRACE_DRIFT_LIMIT:
                raise IntegrationError(
                    f"trace drift {step_drift:.2e} in one step at t={times[k - 1]:.4g} ns; reduce dt (now {h:.3g})"
                )
            drift = max(drift, step_drift)
            rho = rho / tr
        ev = float(np.linalg.eigvalsh(rho)[0])
        if ev < POSITIVITY_FLOOR:
            raise IntegrationError(
                f"state lost positivity at t={times[k]:.4g} ns (min eigenvalue {ev:.3e}); reduce dt (now {h:.3g})"
            )
        min_eig = min(min_eig, ev)
        out[k] = rho
    return Trajectory(times, out, space, h, drift, herm, min_eig)


# --- Liouvillian oracle and steady states -----------------------------------


def liouvillian(model: LindbladModel, sparse: bool = False):
    """Superoperator acting on row-major ``vec(rho)`` (``vec(A rho B) = (A kron B^T) vec(rho)``)."""
    kron = sp.kron if sparse else np.kron
    eye = sp.identity if sparse else np.eye
    d = model.space.total
    heff, ls = _effective(model)
    conv = (lambda m: sp.csr_matrix(m)) if sparse else (lambda m: m)
    ident = eye(d, dtype=complex)
    lv = -1j * kron(conv(heff), ident) + 1j * kron(ident, conv(heff.conj()))
    for l in ls:
        lv = lv + kron(conv(l), conv(l.conj()))
    lv = TWO_PI * lv
    return sp.csr_matrix(lv) if sparse else lv


def expm_trajectory(model: LindbladModel, rho0, grid: TimeGrid) -> np.ndarray:
    """Dense reference solution ``vec(rho(t)) = exp(L t) vec(rho0)``."""
    rho = _as_dm(rho0, model.space)
    lv = liouvillian(model)
    d = rho.shape[0]
    v0 = rho.reshape(-1)
    return np.array([(expm(lv * (t - grid.t0)) @ v0).reshape(d, d) for t in grid.times])


def _steady_direct(lv, d: int) -> np.ndarray:
    lv = sp.lil_matrix(lv)
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[:: d + 1] = 1.0
    lv[0, :] = trace_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    v = spsolve(sp.csc_matrix(lv), rhs)
    rho = v.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def steady_state(
    model: LindbladModel,
    method: str = "direct",
    rho0=None,
    tol: float = 1e-10,
    max_time: Optional[float] = None,
) -> Operator:
    """Stationary state of the model.

    ``"direct"`` solves ``L vec(rho) = 0`` with the trace constraint in place
    of one row (sparse LU). ``"evolve"`` integrates with RK4 in windows of
    ``1 / f_min``-scale until the max elementwise change per window is below
    ``tol``; it raises :class:`IntegrationError` when ``max_time`` is reached.
    """
    d = model.space.total
    if method == "direct":
        return Operator(_steady_direct(liouvillian(model, sparse=True), d), model.space, hermitian=True)
    if method != "evolve":
        raise ValidationError(f"unknown steady-state method {method!r}")
    if rho0 is None:
        rho0 = Operator(np.eye(d) / d, model.space)
    rates = [c.rate for c in model.all_channels()]
    if not rates:
        raise ValidationError("evolve steady state needs at least one dissipative channel")
    window = 1.0 / min(rates)
    if max_time is None:
        max_time = 200 * window
    rho = Operator(_as_dm(rho0, model.space), model.space)
    t = 0.0
    change = math.inf
    while t < max_time:
        new = lindblad_evolve(model, rho, TimeGrid(0.0, window, 2)).rho(1)
        change = float(np.max(np.abs(new.data - rho.data)))
        rho = new
        t += window
        if change < tol:
            return Operator(rho.data, model.space, hermitian=True)
    raise IntegrationError(f"no steady state within {max_time:.3g} ns (last change {change:.2e})")


# --- qubit-mechanics experiments --------------------------------------------


@dataclass(frozen=True)
class QubitRates:
    gamma: float = 0.0
    gamma_phi: float = 0.0
    gamma_m: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        if min(self.gamma, self.gamma_phi, self.gamma_m, self.n_th) < 0:
            raise ValidationError("rates and n_th must be non-negative")


def jc_lindblad_model(model: JCModel, dim: int, rates: QubitRates, omega_r: float = 0.0) -> LindbladModel:
    """RWA JC in the frame rotating at ``omega_b`` with a qubit drive ``Omega_R sx / 2``.

    Qubit dephasing enters as ``(gamma_phi / 2) D[sz]`` so coherences decay at ``gamma_phi``.
    """
    space = SpaceDims((2, dim))
    b = embed(destroy(dim), 1, space)
    sp_ = embed(pauli("plus"), 0, space)
    sm = embed(pauli("minus"), 0, space)
    sz = embed(pauli("z"), 0, space)
    sx = embed(pauli("x"), 0, space)
    h = 0.5 * model.delta * sz + model.G * (sp_ @ b + sm @ b.dag()) + 0.5 * omega_r * sx
    channels = [Channel(sm, rates.gamma), Channel(sz, 0.5 * rates.gamma_phi)]
    return LindbladModel(h.check_hermitian(), tuple(channels), rates.n_th, b, rates.gamma_m)


@dataclass(frozen=True, eq=False)
class RabiResult:
    flux: np.ndarray
    times: np.ndarray
    p_e: np.ndarray  # (n_flux, n_times)
    log_neg: np.ndarray
    n_b: np.ndarray
    detuning: np.ndarray
    coupling: np.ndarray

    @property
    def contrast(self) -> np.ndarray:
        return self.p_e.max(axis=1) - self.p_e.min(axis=1)


def rabi_experiment(
    qubit: TransmonParams,
    flux: Sequence[float],
    mech: MechMode,
    g: float,
    rates: QubitRates,
    omega_r: float,
    grid: TimeGrid,
    dt: Optional[float] = None,
) -> RabiResult:
    """Vacuum Rabi oscillation from ``|e, 0>`` at each flux bias.

    ``G = g |n_ge(flux)|`` and ``Delta = f01(flux) - omega_b``.
    """
    flux = np.asarray(flux, dtype=float)
    space = SpaceDims((2, mech.dim))
    sz = embed(pauli("z"), 0, space)
    nb = embed(destroy(mech.dim).dag() @ destroy(mech.dim), 1, space)
    psi0 = basis_ket(space, (1, 0))
    pe, ln, nbs, dets, gs = [], [], [], [], []
    for x in flux:
        eig = diagonalize(qubit, float(x))
        big_g = g * abs(matrix_elements(eig, "charge_n", 2)[0, 1])
        jc = JCModel(eig.f01, mech.omega_b, big_g)
        traj = lindblad_evolve(jc_lindblad_model(jc, mech.dim, rates, omega_r), psi0, grid, dt=dt)
        pe.append(0.5 * (traj.expect(sz) + 1))
        nbs.append(traj.expect(nb))
        ln.append([log_negativity(traj.rho(k)) for k in range(len(grid.times))])
        dets.append(jc.delta)
        gs.append(big_g)
    return RabiResult(flux, grid.times, np.array(pe), np.array(ln), np.array(nbs), np.array(dets), np.array(gs))


# --- semiclassical spectroscopy ---------------------------------------------


@dataclass(frozen=True)
class SemiclassicalParams:
    """Inputs of the mean-field equations; ``omega_r`` is the weak probe (also called epsilon)."""

    omega_b: float
    omega_q: float
    G: float
    gamma_m: float
    gamma: float
    gamma_phi: float
    omega_r: float

    def __post_init__(self):
        if min(self.gamma_m, self.gamma, self.gamma_phi, self.G) < 0:
            raise ValidationError("rates and coupling must be non-negative")
        if self.omega_r <= 0:
            raise ValidationError("probe amplitude must be positive")
        if self.omega_r > max(self.gamma, 1e-15):
            raise ValidationError("linear-response guard: probe amplitude must not exceed gamma")


@dataclass(frozen=True, eq=False)
class Spectrum:
    detuning: np.ndarray
    p_e: np.ndarray
    converged: np.ndarray

    def peaks(self, rel_prominence: float = 0.05) -> np.ndarray:
        return find_spectral_peaks(self.detuning, self.p_e, rel_prominence)


def _semiclassical_rhs(p: SemiclassicalParams, omega_d: np.ndarray):
    kb = p.gamma_m / 2 + 1j * (p.omega_b - omega_d)
    kq = (p.gamma + p.gamma_phi) / 2 + 1j * (p.omega_q - omega_d)
    g, w = p.G, p.omega_r

    def rhs(b, sm, sz):
        db = -kb * b - 1j * g * sm
        dsm = -kq * sm + 1j * g * b * sz + 1j * w * sz
        dsz = (
            -p.gamma * (sz + 1)
            - 2j * g * b * np.conj(sm)
            + 2j * g * np.conj(b) * sm
            + 2j * w * (sm - np.conj(sm))
        )
        return TWO_PI * db, TWO_PI * dsm, TWO_PI * np.real(dsz)

    return rhs


def semiclassical_spectrum(
    params: SemiclassicalParams,
    omega_d: Sequence[float],
    tol: float = 1e-8,
    max_periods: int = 20000,
    step_fraction: float = 4.0,
) -> Spectrum:
    """Steady-state ``P_e`` versus drive frequency from the mean-field equations.

    All drive points are integrated together with RK4 in the frame rotating
    at ``omega_d``, from ``b = sigma_- = 0``, ``sigma_z = -1``. A point has
    converged once the relative change of ``(b, sigma_-, P_e)`` over one
    check window is below ``tol``; the window is one lab-frame mechanical
    period or ten steps, whichever is longer. ``max_periods`` windows cap
    the run; unconverged points are flagged.

    Fixed points of the ODE are exact fixed points of RK4, so the step only
    has to keep the transient stable; the default is much coarser than for
    trajectory output.
    """
    wd = np.asarray(omega_d, dtype=float)
    f_max = float(np.max(np.abs(params.omega_q - wd)) + np.max(np.abs(params.omega_b - wd)))
    f_max += 2 * params.G + params.gamma + params.gamma_phi + params.gamma_m + 2 * params.omega_r
    dt = 1.0 / (step_fraction * TWO_PI * f_max)
    per_window = max(10, math.ceil((1.0 / params.omega_b) / dt))
    rhs = _semiclassical_rhs(params, wd)
    b = np.zeros_like(wd, dtype=complex)
    sm = np.zeros_like(wd, dtype=complex)
    sz = -np.ones_like(wd)
    converged = np.zeros(wd.shape, dtype=bool)

    def rel(new, old):
        return np.abs(new - old) / np.maximum(np.abs(new), 1e-14)

    for _ in range(max_periods):
        b0, sm0, pe0 = b, sm, 0.5 * (sz + 1)
        for _ in range(per_window):
            k1 = rhs(b, sm, sz)
            k2 = rhs(b + 0.5 * dt * k1[0], sm + 0.5 * dt * k1[1], sz + 0.5 * dt * k1[2])
            k3 = rhs(b + 0.5 * dt * k2[0], sm + 0.5 * dt * k2[1], sz + 0.5 * dt * k2[2])
            k4 = rhs(b + dt * k3[0], sm + dt * k3[1], sz + dt * k3[2])
            b = b + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            sm = sm + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            sz = sz + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(sm))):
            raise IntegrationError("semiclassical integration diverged; reduce the step")
        change = np.maximum.reduce([rel(b, b0), rel(sm, sm0), rel(0.5 * (sz + 1), pe0)])
        converged = change < tol
        if converged.all():
            break
    return Spectrum(wd, 0.5 * (sz + 1), converged)


# --- phonon number splitting --------------------------------------------------


@dataclass(frozen=True)
class NumberSplitParams:
    """Dispersive qubit-mechanics spectroscopy model in the drive frame.

    ``delta_m`` defaults to ``chi``, which puts the mechanical drive on
    resonance with the mechanics while the qubit sits in ``|g>``.
    """

    chi: float
    delta_t: float
    epsilon: float
    omega_r: float
    gamma: float
    gamma_b: float
    dim: int
    delta_m: Optional[float] = None
    n_th: float = 0.0

    def __post_init__(self):
        if min(self.gamma, self.gamma_b, self.n_th) < 0:
            raise ValidationError("rates must be non-negative")
        if self.dim < 2 or (self.epsilon > 0 and self.dim < 8):
            raise ValidationError("mechanical truncation must be >= 8 when the mechanics is driven")
        if self.delta_m is None:
            object.__setattr__(self, "delta_m", self.chi)


def number_splitting_model(p: NumberSplitParams, probe: float = 0.0) -> LindbladModel:
    """``H = (Delta_T - probe + 2 chi n) sz / 2 + Delta_m n + eps (b + b^dag) + Omega_R sx / 2``."""
    space = SpaceDims((2, p.dim))
    b = embed(destroy(p.dim), 1, space)
    n = b.dag() @ b
    sz = embed(pauli("z"), 0, space)
    sx = embed(pauli("x"), 0, space)
    sm = embed(pauli("minus"), 0, space)
    h = 0.5 * (p.delta_t - probe) * sz + p.chi * (n @ sz) + p.delta_m * n
    h = h + p.epsilon * (b + b.dag()) + 0.5 * p.omega_r * sx
    return LindbladModel(h.check_hermitian(), (Channel(sm, p.gamma),), p.n_th, b, p.gamma_b)


def number_splitting(p: NumberSplitParams, probe: Sequence[float], method: str = "direct") -> Spectrum:
    """Steady-state ``P_e`` versus probe detuning ``delta = omega_drive - omega_T``.

    The bare (``epsilon = 0``) line sits at ``delta = Delta_T`` and the
    Fock-state lines at ``Delta_T + 2 chi n``.
    """
    probe = np.asarray(probe, dtype=float)
    space = SpaceDims((2, p.dim))
    pe_op = embed(Operator(np.diag([0.0, 1.0]), 2), 0, space).data
    out = np.empty(probe.shape)
    for k, x in enumerate(probe):
        rho = steady_state(number_splitting_model(p, float(x)), method=method)
        out[k] = np.real(np.trace(pe_op @ rho.data))
    return Spectrum(probe, out, np.ones(probe.shape, dtype=bool))


def find_spectral_peaks(x: np.ndarray, y: np.ndarray, rel_prominence: float = 0.05) -> np.ndarray:
    """Peak positions refined by a parabola through the three top samples.

    Only peaks whose prominence exceeds ``rel_prominence`` of the global
    maximum are kept.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx, _ = find_peaks(y, prominence=rel_prominence * float(np.max(y)))
    out = []
    for i in idx:
        if 0 < i < len(x) - 1:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            denom = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            out.append(x[i] + shift * (x[i + 1] - x[i]))
        else:
            out.append(x[i])
    return np.array(out)
