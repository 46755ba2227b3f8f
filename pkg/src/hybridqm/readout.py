"""Dispersive readout shifts of a cavity capacitively coupled to a qubit.

The Schrieffer-Wolff table ``chi_il = g^2 |n_il|^2 / (E_i - E_l - omega)`` is
the main path; :func:`exact_shift_oracle` diagonalises the full qubit-cavity
Hamiltonian and is used to validate it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import FluxoniumParams, QubitEigensystem, matrix_elements
from .errors import NearResonanceError, ValidationError
from .operators import destroy

RESONANCE_GUARD = 1e-6  # GHz


@dataclass(frozen=True)
class CavitySpec:
    omega: float
    g: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValidationError("cavity frequency must be positive")
        if self.g < 0:
            raise ValidationError("coupling strength must be non-negative")


@dataclass(frozen=True, eq=False)
class DispersiveShifts:
    lamb: np.ndarray
    chi: np.ndarray
    pairwise: np.ndarray
    levels_used: int

    @property
    def readout_pull(self) -> float:
        """State-dependent cavity pull ``2 chi = chi_e - chi_g``."""
        return float(self.chi[1] - self.chi[0])


def default_level_cutoff(eig: QubitEigensystem) -> int:
    return 12 if isinstance(eig.params, FluxoniumParams) else 8


def sw_shifts(eig: QubitEigensystem, cavity: CavitySpec, level_cutoff: int | None = None) -> DispersiveShifts:
    """Lamb shifts, dispersive shifts and the pairwise ``chi_il`` table."""
    if level_cutoff is None:
        level_cutoff = default_level_cutoff(eig)
    if level_cutoff < 2 or level_cutoff > len(eig.energies):
        raise ValidationError(f"level_cutoff {level_cutoff} outside [2, {len(eig.energies)}]")
    e = eig.energies[:level_cutoff]
    n = matrix_elements(eig, "charge_n", level_cutoff)
    denom = e[:, None] - e[None, :] - cavity.omega
    weight = cavity.g**2 * np.abs(n) ** 2
    bad = (np.abs(denom) <= RESONANCE_GUARD) & (weight > 0)
    if np.any(bad):
        i, l = map(int, np.argwhere(bad)[0])
        raise NearResonanceError(
            f"levels ({i}, {l}) are within {RESONANCE_GUARD} GHz of the cavity; dispersive approximation invalid",
            pair=(i, l),
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        table = np.where(weight > 0, weight / denom, 0.0)
    lamb = table.sum(axis=1)
    chi = (table - table.T).sum(axis=1)
    return DispersiveShifts(lamb, chi, table, level_cutoff)


def coupled_qubit_cavity(eig: QubitEigensystem, cavity: CavitySpec, levels: int, photon_cutoff: int) -> np.ndarray:
    """``sum E_i |i><i| + g (a + a^dag) sum n_il |i><l| + omega a^dag a`` (qubit slot first)."""
    e = eig.energies[:levels]
    n = matrix_elements(eig, "charge_n", levels)
    a = destroy(photon_cutoff).data
    ad = a.conj().T
    h = np.kron(np.diag(e), np.eye(photon_cutoff))
    h = h + cavity.g * np.kron(n, a + ad)
    h = h + cavity.omega * np.kron(np.eye(levels), ad @ a)
    return 0.5 * (h + h.conj().T)


def exact_shift_oracle(
    eig: QubitEigensystem, cavity: CavitySpec, photon_cutoff: int = 6, levels: int | None = None
) -> np.ndarray:
    """Cavity pull ``E(i, 1) - E(i, 0) - omega`` per qubit level from exact diagonalisation.

    Dressed states are matched to bare ``|i, n>`` by maximal overlap.
    Returned for every level below ``levels - 1``; the top level of the
    truncated set is not reported because its partners are missing.
    """
    if photon_cutoff < 3:
        raise ValidationError("photon_cutoff must be >= 3")
    if levels is None:
        levels = default_level_cutoff(eig)
    h = coupled_qubit_cavity(eig, cavity, levels, photon_cutoff)
    vals, vecs = np.linalg.eigh(h)
    weights = np.abs(vecs) ** 2  # rows: bare index, cols: dressed index
    pulls = np.empty(levels - 1)
    for i in range(levels - 1):
        e_n = []
        for nphot in (0, 1):
            bare = i * photon_cutoff + nphot
            e_n.append(vals[int(np.argmax(weights[bare]))])
        pulls[i] = e_n[1] - e_n[0] - cavity.omega
    return pulls


def readout_row(flux: float, shifts: DispersiveShifts) -> list[float]:
    """CSV row: flux, eta_g, eta_e, chi_g, chi_e, 2chi."""
    return [flux, shifts.lamb[0], shifts.lamb[1], shifts.chi[0], shifts.chi[1], shifts.readout_pull]


READOUT_COLUMNS = ["flux", "eta_g", "eta_e", "chi_g", "chi_e", "two_chi"]
