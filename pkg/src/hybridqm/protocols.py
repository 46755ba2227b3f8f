"""Protocols built on longitudinal qubit-mechanics coupling.

All closed-form amplitudes use the angular rate ``w = 2 pi G0`` (G0 in GHz,
t in ns). Encoding therefore maps ``|g> -> |+i w t>`` and ``|e> -> |-i w t>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .dynamics import Channel, LindbladModel, steady_state
from .errors import ProtocolError, ValidationError
from .operators import (
    Ket,
    Operator,
    SpaceDims,
    coherent,
    destroy,
    displacement,
    embed,
    fock,
    number,
    parity,
    pauli,
    ptrace,
    tensor,
)

TWO_PI = 2 * math.pi
QUBIT_STATES = ("g", "e", "plus")


def default_dim(beta_max: float) -> int:
    """Fock cutoff comfortably above the displacement guard ``|b|^2 + 5|b|``."""
    b = abs(beta_max)
    return max(20, math.ceil(b * b + 5 * b) + 15)


def _qubit_ket(state: str) -> Ket:
    if state == "g":
        return Ket([1, 0], 2)
    if state == "e":
        return Ket([0, 1], 2)
    if state == "plus":
        return Ket(np.array([1, 1]) / math.sqrt(2), 2)
    raise ValidationError(f"qubit state must be one of {QUBIT_STATES}, got {state!r}")


def conditional_unitary(g0: float, t: float, dim: int) -> Operator:
    """``exp(-2 pi i G0 t sz (b + b^dag))`` on qubit (x) mechanics."""
    space = SpaceDims((2, dim))
    b = destroy(dim)
    h = embed(pauli("z"), 0, space) @ embed(b + b.dag(), 1, space)
    return Operator(expm(-1j * TWO_PI * g0 * t * h.data), space)


@dataclass(frozen=True, eq=False)
class EncodingRun:
    g0: float
    t: float
    qubit_state: str
    beta: complex  # amplitude of the |g> branch; the |e> branch carries -beta
    joint: Ket
    mechanical: Optional[Ket]  # set for g / e inputs, where the state stays a product

    @property
    def mean_amplitude(self) -> complex:
        b = embed(destroy(self.joint.space.dims[1]), 1, self.joint.space)
        return complex(np.vdot(self.joint.data, b.data @ self.joint.data))


def encode(g0: float, t: float, qubit_state: str = "g", dim: Optional[int] = None) -> EncodingRun:
    """Evolve ``qubit (x) |0>`` under the conditional displacement for time ``t``."""
    if t < 0:
        raise ValidationError("time must be non-negative")
    beta = 1j * TWO_PI * g0 * t
    dim = dim or default_dim(abs(beta))
    displacement(beta, dim)  # truncation guard
    psi0 = tensor(_qubit_ket(qubit_state), fock(dim, 0))
    joint = conditional_unitary(g0, t, dim) @ psi0
    mech = None
    if qubit_state in ("g", "e"):
        k = 0 if qubit_state == "g" else 1
        mech = Ket(joint.data.reshape(2, dim)[k], dim)
    return EncodingRun(g0, t, qubit_state, beta, joint, mech)


def branch_coherence(run: EncodingRun) -> complex:
    """Overlap of the two branch states extracted from the joint state (``<-b|b>`` for ``plus`` input)."""
    dim = run.joint.space.dims[1]
    amps = run.joint.data.reshape(2, dim)
    return complex(2 * np.vdot(amps[0], amps[1]))


# --- cat states -------------------------------------------------------------


def cat_state(beta: complex, sign: int, dim: int) -> Ket:
    """Normalised ``|beta> + sign |-beta>``."""
    v = coherent(beta, dim).data + sign * coherent(-beta, dim).data
    return Ket(v / np.linalg.norm(v), dim)


def cat_probabilities(beta: complex) -> tuple[float, float]:
    """Outcome probabilities ``(1 +- exp(-2|beta|^2)) / 2`` for (g, e)."""
    o = math.exp(-2 * abs(beta) ** 2)
    return 0.5 * (1 + o), 0.5 * (1 - o)


@dataclass(frozen=True, eq=False)
class CatPreparation:
    beta: complex
    outcome: str
    state: Ket
    probability: float
    parity: float


def cat_prepare(g0: float, t: float, outcome: str, dim: Optional[int] = None) -> CatPreparation:
    """Encode ``|+>``, rotate the qubit by ``exp(-i pi/4 sy)`` and project on ``outcome``.

    Outcome ``g`` leaves the even cat, ``e`` the odd cat. ``beta`` is the
    amplitude of the branch that started in ``|e>``.
    """
    if outcome not in ("g", "e"):
        raise ValidationError("outcome must be 'g' or 'e'")
    run = encode(g0, t, "plus", dim)
    dim = run.joint.space.dims[1]
    rot = expm(-0.25j * math.pi * pauli("y").data)
    joint = np.kron(rot, np.eye(dim)) @ run.joint.data
    k = 0 if outcome == "g" else 1
    amp = joint.reshape(2, dim)[k]
    prob = float(np.vdot(amp, amp).real)
    if prob < 1e-14:
        raise ProtocolError(f"outcome {outcome!r} has vanishing probability {prob:.2e}")
    state = Ket(amp / math.sqrt(prob), dim)
    par = float(np.vdot(state.data, parity(dim).data @ state.data).real)
    return CatPreparation(-run.beta, outcome, state, prob, par)


# --- geometric-phase force sensing --------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Conditional drive ``G0 sz (e^{i phase} b^dag + h.c.)`` for ``tau`` ns, then an optional ideal pi pulse."""

    tau: float
    phase: float
    pi_pulse: bool = False

    def __post_init__(self):
        if self.tau < 0:
            raise ValidationError("segment duration must be non-negative")


def square_loop(tau: float) -> tuple[Segment, ...]:
    """Four equal legs turning by pi/2: a closed square in each branch."""
    return tuple(Segment(tau, k * math.pi / 2) for k in range(4))


def echo_loop(tau: float) -> tuple[Segment, ...]:
    """Square loop split by pi pulses: each leg's conditional sign flips after the pulse."""
    return (
        Segment(tau, 0.0, True),
        Segment(tau, math.pi / 2),
        Segment(tau, math.pi / 2, True),
        Segment(tau, 0.0),
        Segment(tau, math.pi, True),
        Segment(tau, 3 * math.pi / 2),
        Segment(tau, 3 * math.pi / 2, True),
        Segment(tau, math.pi),
    )


def mirrored(plan: Sequence[Segment]) -> tuple[Segment, ...]:
    """Loop with the opposite orientation (reflection that leaves the force axis fixed)."""
    return tuple(Segment(s.tau, -s.phase, s.pi_pulse) for s in plan)


@dataclass(frozen=True, eq=False)
class ForceSenseRun:
    eta: float
    g0: float
    plan: tuple
    phi_t: float
    sigma_x: float
    sigma_y: float
    areas: tuple[float, float]  # signed area of the branch starting in g, e
    paths: tuple[np.ndarray, np.ndarray]  # phase-space vertices of those branches


def _branch_paths(g0: float, eta: float, plan: Sequence[Segment]):
    signs = {"g": -1, "e": +1}
    paths, phases, final = {}, {}, {}
    for start, s in signs.items():
        pts = [0j]
        phase = 0.0
        for seg in plan:
            a = -1j * TWO_PI * seg.tau * (s * g0 * np.exp(1j * seg.phase) + eta)
            phase += float(np.imag(a * np.conj(pts[-1])))
            pts.append(pts[-1] + a)
            if seg.pi_pulse:
                s = -s
        paths[start] = np.array(pts)
        phases[start] = phase
        final[start] = "g" if s < 0 else "e"
    return paths, phases, final


def conditional_residual(g0: float, plan: Sequence[Segment]) -> float:
    """Distance between the branch end points (the loop is closed when this is zero)."""
    paths, _, _ = _branch_paths(g0, 0.0, plan)
    return float(abs(paths["e"][-1] - paths["g"][-1]))


def force_sense(eta: float, g0: float, plan: Sequence[Segment], closure_tol: float = 1e-9) -> ForceSenseRun:
    """Qubit phase accumulated by ``|+>`` over a closed conditional loop under a weak force.

    Each segment applies ``D(a_s)`` with ``a_s = -2 pi i tau (s G0 e^{i phase} + eta)``
    on the branch with ``sz = s``. A branch's geometric phase is
    ``sum_k Im(a_k P_{k-1}^*)``, twice its signed enclosed area.
    ``phi_T`` is the phase of the branch ending in ``|e>`` minus that ending
    in ``|g>``; then ``<sx> = cos phi_T`` and ``<sy> = -sin phi_T``.
    The loop-only part of the phase is identical for both branches and drops
    out, so ``phi_T`` is linear in ``eta`` and vanishes at ``eta = 0``.
    """
    plan = tuple(plan)
    if not plan:
        raise ValidationError("empty segment plan")
    res = conditional_residual(g0, plan)
    if res > closure_tol:
        raise ProtocolError(f"segment plan does not close the conditional loop (residual {res:.3e})")
    paths, phases, final = _branch_paths(g0, eta, plan)
    ends_e = "e" if final["e"] == "e" else "g"
    ends_g = "g" if ends_e == "e" else "e"
    phi = phases[ends_e] - phases[ends_g]
    areas = (0.5 * phases["g"], 0.5 * phases["e"])
    return ForceSenseRun(eta, g0, plan, phi, math.cos(phi), -math.sin(phi), areas, (paths["g"], paths["e"]))


def force_sense_unitary(eta: float, g0: float, plan: Sequence[Segment], dim: int = 40) -> tuple[float, float, float]:
    """Joint qubit-mechanics propagation of ``|+, 0>``; returns ``(phi_T, <sx>, <sy>)``."""
    space = SpaceDims((2, dim))
    b = embed(destroy(dim), 1, space).data
    bd = b.conj().T
    sz = embed(pauli("z"), 0, space).data
    sx = embed(pauli("x"), 0, space).data
    psi = tensor(_qubit_ket("plus"), fock(dim, 0)).data
    for seg in plan:
        h = g0 * sz @ (np.exp(1j * seg.phase) * bd + np.exp(-1j * seg.phase) * b) + eta * (b + bd)
        psi = expm(-1j * TWO_PI * seg.tau * h) @ psi
        if seg.pi_pulse:
            psi = sx @ psi
    rho_q = ptrace(Ket(psi, space).dm(), [0]).data
    coh = rho_q[1, 0]
    return float(np.angle(coh)), float(2 * coh.real), float(-2 * coh.imag)


# --- qubit as a cold bath -------------------------------------------------------


@dataclass(frozen=True)
class CoolingSetup:
    """Driven longitudinal model in the qubit drive frame.

    ``detuning`` is ``omega_q - omega_d``: ``+omega_b`` is the red drive,
    ``-omega_b`` the blue one.
    """

    omega_b: float
    G: float
    omega_r: float
    detuning: float
    gamma: float
    gamma_m: float
    n_th: float
    dim: int = 15

    def __post_init__(self):
        if min(self.gamma, self.gamma_m, self.n_th, self.omega_r, self.G) < 0:
            raise ValidationError("rates, drive and coupling must be non-negative")
        if self.dim < 4:
            raise ValidationError("mechanical truncation too small")


@dataclass(frozen=True)
class CoolingResult:
    n_steady: float
    n_thermal: float
    top_population: float  # weight on the highest Fock level (truncation diagnostic)

    @property
    def cooled(self) -> bool:
        return self.n_steady < self.n_thermal


def cooling_model(c: CoolingSetup) -> LindbladModel:
    """``d sz / 2 + w_b n + G sz (b + b^dag) + Omega sx / 2`` with qubit decay and a thermal mechanical bath."""
    space = SpaceDims((2, c.dim))
    b = embed(destroy(c.dim), 1, space)
    sz = embed(pauli("z"), 0, space)
    sx = embed(pauli("x"), 0, space)
    sm = embed(pauli("minus"), 0, space)
    h = 0.5 * c.detuning * sz + c.omega_b * (b.dag() @ b) + c.G * (sz @ (b + b.dag())) + 0.5 * c.omega_r * sx
    return LindbladModel(h.check_hermitian(), (Channel(sm, c.gamma),), c.n_th, b, c.gamma_m)


def cold_bath_cooling_check(c: CoolingSetup, method: str = "direct") -> CoolingResult:
    rho = steady_state(cooling_model(c), method=method)
    mech = ptrace(rho, [1])
    n = float(number(c.dim).expect(mech).real)
    return CoolingResult(n, c.n_th, float(mech.data[-1, -1].real))
