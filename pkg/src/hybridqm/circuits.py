"""Cooper-pair-box, charge-qubit, transmon and fluxonium spectra.

Energies are E/h in GHz. Flux is in units of the flux quantum and the gate
charge in Cooper pairs, so both are periodic with period 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import (
    DegenerateJunctionError,
    TruncationError,
    UnsupportedBasisError,
    ValidationError,
)
from .operators import Operator, SpaceDims, apply_function, destroy, eig_hermitian

DEFAULT_N_CHARGE = 20
DEFAULT_N_FOCK = 60
FLUXONIUM_TRUNCATION_TOL = 1e-6


@dataclass(frozen=True)
class TransmonParams:
    """Split (flux-tunable) Cooper pair box / transmon in the charge basis."""

    e_j1: float
    e_j2: float
    e_c: float
    n_charge: int = DEFAULT_N_CHARGE

    def __post_init__(self):
        if min(self.e_j1, self.e_j2, self.e_c) <= 0:
            raise ValidationError("transmon energies must be positive")
        if self.n_charge < 5:
            raise ValidationError(f"n_charge must be >= 5, got {self.n_charge}")

    @property
    def e_j_max(self) -> float:
        return self.e_j1 + self.e_j2

    @property
    def asymmetry(self) -> float:
        return (self.e_j1 - self.e_j2) / (self.e_j1 + self.e_j2)

    @classmethod
    def symmetric(cls, e_j_max: float, e_c: float, n_charge: int = DEFAULT_N_CHARGE):
        return cls(e_j_max / 2, e_j_max / 2, e_c, n_charge)


@dataclass(frozen=True)
class FluxoniumParams:
    e_j: float
    e_c: float
    e_l: float
    n_fock: int = DEFAULT_N_FOCK

    def __post_init__(self):
        if min(self.e_j, self.e_c, self.e_l) < 0 or self.e_c == 0 or self.e_l == 0:
            raise ValidationError("fluxonium E_C, E_L must be positive and E_J >= 0")
        if self.n_fock < 20:
            raise ValidationError(f"n_fock must be >= 20, got {self.n_fock}")

    @property
    def plasma_frequency(self) -> float:
        return math.sqrt(8 * self.e_c * self.e_l)


QubitSpec = Union[TransmonParams, FluxoniumParams]


@dataclass(frozen=True)
class BiasPoint:
    flux: float = 0.0
    gate_charge: float = 0.0


@dataclass(frozen=True, eq=False)
class QubitEigensystem:
    """Diagonalised qubit: ascending energies and eigenvectors in the build basis.

    ``operators`` holds the build-basis matrices available for
    :func:`matrix_elements` (``charge_n``, and for oscillator builds
    ``phase_theta``); ``cos_theta`` is always present.
    """

    energies: np.ndarray
    states: np.ndarray
    params: QubitSpec
    bias: BiasPoint
    operators: dict = field(default_factory=dict, repr=False)

    @property
    def f01(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def anharmonicity(self) -> float:
        e = self.energies
        return float((e[2] - e[1]) - (e[1] - e[0]))


# --- transmon / CPB -------------------------------------------------------


def ej_eff(params: TransmonParams, flux: float) -> float:
    """Flux-tuned Josephson energy of the split junction."""
    x = math.pi * flux
    d = params.asymmetry
    return params.e_j_max * math.sqrt(math.cos(x) ** 2 + d * d * math.sin(x) ** 2)


def cpb_hamiltonian(e_c: float, ej_eff_value: float, gate_charge: float, n_charge: int = DEFAULT_N_CHARGE) -> Operator:
    """Charge-basis CPB Hamiltonian over ``m = -n_charge .. n_charge``."""
    if n_charge < 5:
        raise ValidationError(f"n_charge must be >= 5, got {n_charge}")
    m = np.arange(-n_charge, n_charge + 1)
    h = np.diag(4.0 * e_c * (m - gate_charge) ** 2).astype(complex)
    off = -0.5 * ej_eff_value * np.ones(len(m) - 1)
    h += np.diag(off, 1) + np.diag(off, -1)
    return Operator(h, SpaceDims((len(m),)), hermitian=True)


def _charge_ops(n_charge: int) -> dict:
    m = np.arange(-n_charge, n_charge + 1)
    hop = np.diag(np.ones(len(m) - 1), 1)
    space = SpaceDims((len(m),))
    return {
        "charge_n": Operator(np.diag(m.astype(float)), space, hermitian=True),
        "cos_theta": Operator(0.5 * (hop + hop.T), space, hermitian=True),
    }


def charge_qubit_levels(e_c: float, ej_eff_value: float, gate_charge: float) -> tuple[float, float]:
    """Two-level charge-qubit reduction: returns ``(E_el, Omega)`` in GHz."""
    e_el = 4.0 * e_c * (1.0 - 2.0 * gate_charge)
    return e_el, math.hypot(ej_eff_value, e_el)


def charge_qubit_hamiltonian(e_c: float, ej_eff_value: float, gate_charge: float) -> Operator:
    """``-E_el/2 sz - E_J/2 sx`` in the charge basis ``(|0>, |1>)``.

    Uses the standard Pauli matrices for the charge basis, with ``|0>`` first.
    """
    e_el, _ = charge_qubit_levels(e_c, ej_eff_value, gate_charge)
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    return Operator(-0.5 * e_el * sz - 0.5 * ej_eff_value * sx, SpaceDims((2,)), hermitian=True)


def transmon_perturbative(params: TransmonParams, flux: float, n: int) -> tuple[float, float, float]:
    """Perturbative transmon level ``E_n`` with ``alpha = -E_C`` and ``alpha_r = alpha / (E_1 - E_0)``.

    ``alpha_r`` is computed from the closed-form energies, which gives
    approximately ``-(8 E_J/E_C)^(-1/2)``; it is not the ``-8 (E_J/E_C)^(-1/2)``
    prefactor sometimes quoted.
    """
    ej = ej_eff(params, flux)
    if ej <= 0:
        raise DegenerateJunctionError(f"E_J^eff vanishes at flux {flux}")
    ratio = ej / params.e_c
    if ratio < 20:
        raise ValidationError(f"perturbative transmon needs E_J/E_C >= 20 (got {ratio:.3g})")
    if ratio < 50:
        warnings.warn(f"E_J/E_C = {ratio:.3g} < 50: perturbative levels are approximate", stacklevel=2)

    def level(k):
        plasma = math.sqrt(8 * params.e_c * ej)
        return plasma * (k + 0.5) - ej - params.e_c / 12.0 * (6 * k * k + 6 * k + 3)

    alpha = (level(2) - level(1)) - (level(1) - level(0))
    return level(n), alpha, alpha / (level(1) - level(0))


# --- fluxonium ------------------------------------------------------------


@lru_cache(maxsize=64)
def _fluxonium_basis(e_c: float, e_l: float, n_fock: int):
    b = destroy(n_fock).data
    bd = b.conj().T
    theta = (8 * e_c / e_l) ** 0.25 * (b + bd) / math.sqrt(2)
    n_op = 1j * (e_l / (8 * e_c)) ** 0.25 * (bd - b) / math.sqrt(2)
    space = SpaceDims((n_fock,))
    theta_op = Operator(theta, space, hermitian=True)
    cos_t = apply_function(theta_op, np.cos).data
    sin_t = apply_function(theta_op, np.sin).data
    # harmonic part 4 E_C n^2 + E_L theta^2 / 2 is exactly diagonal here
    kinetic = np.diag(math.sqrt(8 * e_c * e_l) * (np.arange(n_fock) + 0.5)).astype(complex)
    for arr in (theta, n_op, cos_t, sin_t, kinetic):
        arr.setflags(write=False)
    return theta, n_op, cos_t, sin_t, kinetic


def fluxonium_operators(params: FluxoniumParams) -> dict:
    theta, n_op, cos_t, sin_t, _ = _fluxonium_basis(params.e_c, params.e_l, params.n_fock)
    space = SpaceDims((params.n_fock,))
    return {
        "phase_theta": Operator(theta, space, hermitian=True),
        "charge_n": Operator(n_op, space, hermitian=True),
        "cos_theta": Operator(cos_t, space, hermitian=True),
        "sin_theta": Operator(sin_t, space, hermitian=True),
    }


def fluxonium_hamiltonian(params: FluxoniumParams, flux: float) -> Operator:
    """``4E_C n^2 + E_L theta^2/2 - E_J cos(theta + 2 pi flux)`` in the oscillator basis."""
    _, _, cos_t, sin_t, kinetic = _fluxonium_basis(params.e_c, params.e_l, params.n_fock)
    phi = 2 * math.pi * flux
    h = kinetic - params.e_j * (math.cos(phi) * cos_t - math.sin(phi) * sin_t)
    return Operator(h, SpaceDims((params.n_fock,)), hermitian=True)


def fluxonium_hamiltonian_inductive(params: FluxoniumParams, flux: float) -> Operator:
    """Gauge variant with the flux in the inductive term: ``E_L (theta - 2 pi flux)^2 / 2 - E_J cos theta``.

    Shifting ``theta`` maps it onto :func:`fluxonium_hamiltonian`, so the two
    must share a spectrum (up to truncation).
    """
    theta, _, cos_t, _, kinetic = _fluxonium_basis(params.e_c, params.e_l, params.n_fock)
    phi = 2 * math.pi * flux
    eye = np.eye(params.n_fock)
    h = kinetic - params.e_l * phi * theta + 0.5 * params.e_l * phi * phi * eye - params.e_j * cos_t
    return Operator(h, SpaceDims((params.n_fock,)), hermitian=True)


# --- diagonalisation and sweeps ------------------------------------------


def diagonalize(qubit: QubitSpec, bias: BiasPoint | float = 0.0, check_truncation: bool = False) -> QubitEigensystem:
    """Build and diagonalise the qubit Hamiltonian at a bias point.

    For fluxonium, ``check_truncation`` rebuilds with ``n_fock + 10`` states and
    raises :class:`TruncationError` if any of the lowest four levels moves by
    more than 1e-6 GHz.
    """
    if not isinstance(bias, BiasPoint):
        bias = BiasPoint(flux=float(bias))
    if isinstance(qubit, TransmonParams):
        h = cpb_hamiltonian(qubit.e_c, ej_eff(qubit, bias.flux), bias.gate_charge, qubit.n_charge)
        ops = _charge_ops(qubit.n_charge)
    elif isinstance(qubit, FluxoniumParams):
        h = fluxonium_hamiltonian(qubit, bias.flux)
        ops = fluxonium_operators(qubit)
        if check_truncation:
            _check_fluxonium_truncation(qubit, bias.flux, h)
    else:
        raise ValidationError(f"unsupported qubit spec {type(qubit).__name__}")
    vals, vecs = eig_hermitian(h)
    return QubitEigensystem(vals, vecs, qubit, bias, ops)


def _check_fluxonium_truncation(qubit: FluxoniumParams, flux: float, h: Operator):
    bigger = FluxoniumParams(qubit.e_j, qubit.e_c, qubit.e_l, qubit.n_fock + 10)
    low = np.linalg.eigvalsh(h.data)[:4]
    low_big = np.linalg.eigvalsh(fluxonium_hamiltonian(bigger, flux).data)[:4]
    shift = float(np.max(np.abs(low - low_big)))
    if shift > FLUXONIUM_TRUNCATION_TOL:
        raise TruncationError(
            f"fluxonium levels moved {shift:.2e} GHz when n_fock {qubit.n_fock} -> {bigger.n_fock}"
        )


def basis_size(qubit: QubitSpec) -> int:
    if isinstance(qubit, TransmonParams):
        return 2 * qubit.n_charge + 1
    return qubit.n_fock


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Columnar 1-D sweep: ``bias[i]`` with ascending ``energies[i, :k]``."""

    variable: str
    bias: np.ndarray
    energies: np.ndarray

    @property
    def transitions(self) -> np.ndarray:
        """``E_i - E_0`` for ``i = 1..k-1``."""
        return self.energies[:, 1:] - self.energies[:, :1]

    def columns(self) -> tuple[list[str], np.ndarray]:
        k = self.energies.shape[1]
        names = [self.variable] + [f"E{i}" for i in range(k)] + [f"f0{i}" for i in range(1, k)]
        return names, np.column_stack([self.bias, self.energies, self.transitions])


def spectrum_sweep(
    qubit: QubitSpec,
    grid: Sequence[float],
    k: int,
    variable: str = "flux",
    fixed: BiasPoint = BiasPoint(),
    check_truncation: bool = False,
) -> SweepTable:
    """Lowest ``k`` levels along a flux or gate-charge grid."""
    if variable not in ("flux", "gate_charge"):
        raise ValidationError(f"sweep variable must be flux or gate_charge, got {variable!r}")
    if k < 2 or k > basis_size(qubit) // 2:
        raise ValidationError(f"k={k} must lie in [2, basis_size/2 = {basis_size(qubit) // 2}]")
    grid = np.asarray(grid, dtype=float)
    out = np.empty((len(grid), k))
    for i, x in enumerate(grid):
        bias = BiasPoint(flux=x, gate_charge=fixed.gate_charge) if variable == "flux" else BiasPoint(
            flux=fixed.flux, gate_charge=x
        )
        if isinstance(qubit, TransmonParams):
            h = cpb_hamiltonian(qubit.e_c, ej_eff(qubit, bias.flux), bias.gate_charge, qubit.n_charge)
        else:
            h = fluxonium_hamiltonian(qubit, bias.flux)
            if check_truncation:
                _check_fluxonium_truncation(qubit, bias.flux, h)
        out[i] = np.linalg.eigvalsh(h.data)[:k]
    return SweepTable(variable, grid, out)


def cpb_sweep(e_c: float, ej_eff_value: float, gate_charges: Sequence[float], k: int, n_charge: int = DEFAULT_N_CHARGE) -> SweepTable:
    """Gate-charge sweep at a fixed Josephson energy (the charge-dispersion plot)."""
    grid = np.asarray(gate_charges, dtype=float)
    out = np.array([np.linalg.eigvalsh(cpb_hamiltonian(e_c, ej_eff_value, ng, n_charge).data)[:k] for ng in grid])
    return SweepTable("gate_charge", grid, out)


def charge_dispersion(e_c: float, ej_eff_value: float, points: int = 101, n_charge: int = DEFAULT_N_CHARGE) -> float:
    """Peak-to-peak variation of ``E_1 - E_0`` over one gate-charge period."""
    f01 = cpb_sweep(e_c, ej_eff_value, np.linspace(0.0, 1.0, points), 2, n_charge).transitions[:, 0]
    return float(f01.max() - f01.min())


def matrix_elements(eig: QubitEigensystem, which: str, levels: int) -> np.ndarray:
    """``M_ij = <i|O|j>`` between the lowest ``levels`` eigenstates."""
    if which not in ("charge_n", "phase_theta", "cos_theta"):
        raise ValidationError(f"unknown operator {which!r}")
    if which not in eig.operators:
        raise UnsupportedBasisError(f"{which} is not available in the {type(eig.params).__name__} build basis")
    if levels > eig.states.shape[1]:
        raise ValidationError(f"requested {levels} levels, only {eig.states.shape[1]} available")
    v = eig.states[:, :levels]
    m = v.conj().T @ eig.operators[which].data @ v
    return 0.5 * (m + m.conj().T)


def charge_zero_point(ej_eff_value: float, e_c: float) -> float:
    """Harmonic-limit charge matrix element ``|n_01| = (E_J / 8 E_C)^(1/4) / sqrt(2)``."""
    return (ej_eff_value / (8 * e_c)) ** 0.25 / math.sqrt(2)
