"""Scenario kinds: schema plus the computation producing CSV tables.

Every kind maps validated panel fields to one or more :class:`Table`
objects. Tables carry a tolerance class used by golden verification:
``eigen`` (1e-9 absolute), ``trajectory`` (1e-6 absolute) or ``peaks``
(1% of the expected peak spacing).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import circuits, dynamics, optomech, protocols, qubit_mech, readout
from .config import (
    boolean,
    choice,
    grid,
    integer,
    nonneg,
    number_list,
    positive,
    qubit,
    real,
    time_grid,
)
from .errors import ValidationError
from .operators import basis_ket, coherent, destroy, embed, log_negativity, pauli, wigner

TOLERANCE_CLASSES = ("eigen", "trajectory", "peaks")


@dataclass(frozen=True, eq=False)
class Table:
    name: str
    columns: tuple[str, ...]
    data: np.ndarray
    tolerance: str

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if data.shape[1] != len(self.columns):
            raise ValueError(f"table {self.name}: {data.shape[1]} columns vs {len(self.columns)} names")
        if self.tolerance not in TOLERANCE_CLASSES:
            raise ValueError(f"unknown tolerance class {self.tolerance}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "columns", tuple(self.columns))


@dataclass(frozen=True)
class Kind:
    fields: dict
    run: Callable[[str, dict], list]
    check: Optional[Callable[[dict, str], None]] = None
    doc: str = ""


def _peaks_table(name: str, x: np.ndarray, y: np.ndarray, rel: float = 0.05) -> Table:
    pk = dynamics.find_spectral_peaks(x, y, rel)
    return Table(f"{name}_peaks", ("position",), pk.reshape(-1, 1) if len(pk) else np.empty((0, 1)), "peaks")


# --- spectra --------------------------------------------------------------------


def _run_flux_sweep(name, f):
    q = f["qubit"]
    check = f["check_truncation"]
    if check is None:
        check = isinstance(q, circuits.FluxoniumParams)
    sw = circuits.spectrum_sweep(q, f["flux"], f["levels"], "flux", circuits.BiasPoint(0.0, f["gate_charge"]), check)
    cols, data = sw.columns()
    tables = [Table(name, cols, data, "eigen")]
    if isinstance(q, circuits.TransmonParams):
        rows = []
        for x in (0.0,):
            e1, alpha, _ = circuits.transmon_perturbative(q, x, 1)
            e0, _, _ = circuits.transmon_perturbative(q, x, 0)
            rows.append([x, circuits.diagonalize(q, x).f01, e1 - e0, alpha])
        tables.append(Table(f"{name}_perturbative", ("flux", "f01_exact", "f01_perturbative", "alpha_perturbative"), rows, "eigen"))
    return tables


def _run_charge_sweep(name, f):
    e_c = f["e_c"]
    ej = f["ej_eff"] if f["ej_eff"] is not None else 4 * e_c * f["ratio"]
    sw = circuits.cpb_sweep(e_c, ej, f["gate_charge"], f["levels"], f["n_charge"])
    cols, data = sw.columns()
    tables = [Table(name, cols, data, "eigen")]
    if f["bare"]:
        m = np.arange(-2, 3)
        bare = np.array([[4 * e_c * (mm - ng) ** 2 for mm in m] for ng in sw.bias])
        tables.append(Table(f"{name}_bare", ["gate_charge"] + [f"m{mm:+d}" for mm in m], np.column_stack([sw.bias, bare]), "eigen"))
    disp = circuits.charge_dispersion(e_c, ej, n_charge=f["n_charge"])
    tables.append(Table(f"{name}_dispersion", ("ratio", "dispersion"), [[ej / (4 * e_c), disp]], "eigen"))
    return tables


def _check_charge(f, path):
    if (f["ej_eff"] is None) == (f["ratio"] is None):
        raise ValidationError(f"{path}: give exactly one of 'ej_eff' or 'ratio'")


# --- qubit-mechanics -----------------------------------------------------------------


def _run_avoided(name, f):
    q = f["qubit"]
    mech = qubit_mech.MechMode(f["omega_b"], f["mech_dim"])
    ac = qubit_mech.avoided_crossing(q, mech, f["g"], f["flux"], refine=f["refine"])
    branches = Table(name, ("flux", "E_lower", "E_upper"), np.column_stack([ac.flux, ac.branches]), "eigen")
    grid_ = ac.flux
    root = qubit_mech.resonance_flux(q, f["omega_b"], float(grid_[0]), float(grid_[-1]))
    summary = Table(
        f"{name}_summary",
        ("gap", "gap_flux", "n_ge", "two_g_n_ge", "resonance_flux"),
        [[ac.gap, ac.gap_flux, ac.n_ge, 2 * f["g"] * ac.n_ge, root]],
        "eigen",
    )
    return [branches, summary]


def _run_dispersive(name, f):
    cav = readout.CavitySpec(f["cavity_omega"], f["g"])
    rows = []
    for x in f["flux"]:
        eig = circuits.diagonalize(f["qubit"], float(x))
        sh = readout.sw_shifts(eig, cav, f["level_cutoff"])
        row = readout.readout_row(float(x), sh)
        if f["exact"]:
            pulls = readout.exact_shift_oracle(eig, cav, levels=sh.levels_used)
            row.append(pulls[1] - pulls[0])
        rows.append(row)
    cols = list(readout.READOUT_COLUMNS) + (["two_chi_exact"] if f["exact"] else [])
    return [Table(name, cols, rows, "eigen")]


def _rabi_flux(f) -> np.ndarray:
    if f["flux"] is not None:
        return f["flux"]
    root = qubit_mech.resonance_flux(f["qubit"], f["omega_b"])
    return root + f["flux_offsets"]


def _run_rabi(name, f):
    rates = dynamics.QubitRates(f["gamma"], f["gamma_phi"], f["gamma_m"], f["n_th"])
    mech = qubit_mech.MechMode(f["omega_b"], f["mech_dim"])
    res = dynamics.rabi_experiment(f["qubit"], _rabi_flux(f), mech, f["g"], rates, f["omega_r"], f["time"])
    rows = []
    for i, x in enumerate(res.flux):
        for k, t in enumerate(res.times):
            rows.append([x, t, res.p_e[i, k], res.log_neg[i, k], res.n_b[i, k]])
    summary = np.column_stack([res.flux, res.detuning, res.coupling, res.contrast])
    return [
        Table(name, ("flux", "t", "p_e", "log_neg", "n_b"), rows, "trajectory"),
        Table(f"{name}_summary", ("flux", "detuning", "G", "contrast"), summary, "trajectory"),
    ]


def _check_rabi(f, path):
    if (f["flux"] is None) == (f["flux_offsets"] is None):
        raise ValidationError(f"{path}: give exactly one of 'flux' or 'flux_offsets'")


def _run_semiclassical(name, f):
    p = dynamics.SemiclassicalParams(
        f["omega_b"], f["omega_q"], f["G"], f["gamma_m"], f["gamma"], f["gamma_phi"], f["omega_r"]
    )
    det = f["detuning"]
    sp = dynamics.semiclassical_spectrum(p, f["omega_q"] + det)
    curve = Table(name, ("detuning", "p_e", "converged"), np.column_stack([det, sp.p_e, sp.converged]), "trajectory")
    return [curve, _peaks_table(name, det, sp.p_e)]


def _run_jc_rabi(name, f):
    jc = qubit_mech.JCModel(f["delta"], 0.0, f["G"])
    rates = dynamics.QubitRates(f["gamma"], 0.0, f["gamma_m"], 0.0)
    model = dynamics.jc_lindblad_model(jc, f["mech_dim"], rates)
    space = model.space
    traj = dynamics.lindblad_evolve(model, basis_ket(space, (1, 0)), f["time"])
    sz = embed(pauli("z"), 0, space)
    nb = embed(destroy(f["mech_dim"]).dag() @ destroy(f["mech_dim"]), 1, space)
    ln = [log_negativity(traj.rho(k)) for k in range(len(traj.times))]
    data = np.column_stack([traj.times, 0.5 * (traj.expect(sz) + 1), ln, traj.expect(nb)])
    return [Table(name, ("t", "p_e", "log_neg", "n_b"), data, "trajectory")]


def _run_numbersplit(name, f):
    p = dynamics.NumberSplitParams(
        f["chi"], f["delta_t"], f["epsilon"], f["omega_r"], f["gamma"], f["gamma_b"], f["mech_dim"], f["delta_m"], f["n_th"]
    )
    sp = dynamics.number_splitting(p, f["probe"])
    curve = Table(name, ("probe", "p_e"), np.column_stack([sp.detuning, sp.p_e]), "trajectory")
    return [curve, _peaks_table(name, sp.detuning, sp.p_e, 0.02)]


# --- protocols ---------------------------------------------------------------------


def _run_encode(name, f):
    rows = []
    for t in f["times"]:
        run = protocols.encode(f["g0"], float(t), f["qubit_state"], f["dim"])
        b = run.mean_amplitude
        fid = math.nan
        if run.mechanical is not None:
            target = coherent(run.beta if f["qubit_state"] == "g" else -run.beta, run.joint.space.dims[1])
            fid = abs(target.overlap(run.mechanical)) ** 2
        rows.append([t, b.real, b.imag, fid])
    return [Table(name, ("t", "re_b", "im_b", "fidelity"), rows, "trajectory")]


def _run_wigner(name, f):
    state = f["state"]
    beta_mag = f["amplitude"]
    g0t = beta_mag / (2 * math.pi)
    if state.startswith("encode"):
        run = protocols.encode(g0t, 1.0, state[-1], f["dim"])
        rho = run.mechanical
        extra = [0.0, 1.0]
    else:
        cat = protocols.cat_prepare(g0t, 1.0, state[-1], f["dim"])
        rho = cat.state
        extra = [cat.parity, cat.probability]
    x, p = f["x"], f["p"]
    w = wigner(rho, x, p)
    xx, pp = np.meshgrid(x, p)
    grid_tab = Table(name, ("x", "p", "w"), np.column_stack([xx.ravel(), pp.ravel(), w.values.ravel()]), "trajectory")
    w0 = float(wigner(rho, np.array([0.0]), np.array([0.0])).values[0, 0])
    summary = Table(f"{name}_summary", ("parity", "probability", "w_origin", "integral"), [extra + [w0, w.integral]], "trajectory")
    return [grid_tab, summary]


def _run_force(name, f):
    plan = protocols.square_loop(f["tau"]) if f["loop"] == "square" else protocols.echo_loop(f["tau"])
    if f["mirrored"]:
        plan = protocols.mirrored(plan)
    rows = []
    for eta in f["eta"]:
        r = protocols.force_sense(float(eta), f["g0"], plan)
        phi_u, sx_u, sy_u = protocols.force_sense_unitary(float(eta), f["g0"], plan, f["dim"])
        rows.append([eta, r.phi_t, r.sigma_x, r.sigma_y, phi_u, sx_u, sy_u])
    cols = ("eta", "phi_t", "sigma_x", "sigma_y", "phi_t_unitary", "sigma_x_unitary", "sigma_y_unitary")
    return [Table(name, cols, rows, "trajectory")]


# --- optomechanics ---------------------------------------------------------------------


def _run_transduce(name, f):
    losses = optomech.TransductionLosses(f["gamma"], f["gamma_m"], f["kappa"], f["n_th"])
    dims = (f["mech_dim"], f["cavity_dim"])
    rep = optomech.transduce(f["g_tm"], f["g_alpha"], losses=losses, dims=dims)
    times = f["time"].times
    tr = optomech.transfer_trace(f["g_tm"], f["g_alpha"], rep.t1, times, dims, losses)
    trace = Table(name, ("t", "p_e", "n_b", "n_a"), np.column_stack([times, tr["p_e"], tr["n_b"], tr["n_a"]]), "trajectory")
    summary = Table(
        f"{name}_summary",
        ("t1", "t2", "fidelity", "superposition_fidelity", "t1_oracle", "t2_oracle"),
        [[rep.t1, rep.t2, rep.fidelity, rep.superposition_fidelity, rep.t1_oracle, rep.t2_oracle]],
        "trajectory",
    )
    return [trace, summary]


def _run_optical_readout(name, f):
    beta = complex(f["beta_re"], f["beta_im"])
    times = f["time"].times
    ro = optomech.longitudinal_readout_via_optics(beta, f["g_alpha"], times, f["reference"])
    trace = Table(name, ("t", "n_g", "n_e"), np.column_stack([times, ro.photons_g, ro.photons_e]), "trajectory")
    summary = Table(f"{name}_summary", ("t_bright_g", "t_bright_e", "contrast"), [[ro.t_bright_g, ro.t_bright_e, ro.contrast]], "trajectory")
    return [trace, summary]


def _run_cold_bath(name, f):
    rows = []
    for det in f["detuning"]:
        c = protocols.CoolingSetup(f["omega_b"], f["G"], f["omega_r"], float(det), f["gamma"], f["gamma_m"], f["n_th"], f["mech_dim"])
        r = protocols.cold_bath_cooling_check(c)
        rows.append([det, r.n_steady, r.n_thermal, r.top_population])
    return [Table(name, ("detuning", "n_steady", "n_thermal", "top_population"), rows, "trajectory")]


def _run_sideband_rates(name, f):
    rows = []
    for det in f["detuning"]:
        r = optomech.cooling_rates(f["g_l"], f["g_alpha"], (f["qubit_linewidth"], f["qubit_detuning"]), (f["kappa"], float(det)), f["omega"])
        rows.append([det, r.gamma_minus, r.gamma_plus])
    return [Table(name, ("detuning", "gamma_minus", "gamma_plus"), rows, "trajectory")]


# --- registry ------------------------------------------------------------------------------

R = True  # required
O = False  # optional

KINDS: dict[str, Kind] = {
    "flux_sweep": Kind(
        {
            "qubit": (qubit, R, None),
            "flux": (grid, R, None),
            "levels": (integer(2), O, 4),
            "gate_charge": (real, O, 0.0),
            "check_truncation": (boolean, O, None),
        },
        _run_flux_sweep,
        doc="lowest levels versus flux",
    ),
    "charge_sweep": Kind(
        {
            "e_c": (positive, R, None),
            "ej_eff": (nonneg, O, None),
            "ratio": (nonneg, O, None),
            "gate_charge": (grid, R, None),
            "levels": (integer(2), O, 3),
            "n_charge": (integer(5), O, 20),
            "bare": (boolean, O, False),
        },
        _run_charge_sweep,
        _check_charge,
        "CPB levels versus gate charge",
    ),
    "avoided": Kind(
        {
            "qubit": (qubit, R, None),
            "omega_b": (positive, R, None),
            "mech_dim": (integer(2), O, 4),
            "g": (nonneg, R, None),
            "flux": (grid, R, None),
            "refine": (boolean, O, True),
        },
        _run_avoided,
        doc="charge-coupled qubit-mechanics dressed branches",
    ),
    "dispersive": Kind(
        {
            "qubit": (qubit, R, None),
            "cavity_omega": (positive, R, None),
            "g": (nonneg, R, None),
            "flux": (grid, R, None),
            "level_cutoff": (integer(2), O, None),
            "exact": (boolean, O, True),
        },
        _run_dispersive,
        doc="Lamb and dispersive shifts versus flux",
    ),
    "rabi": Kind(
        {
            "qubit": (qubit, R, None),
            "omega_b": (positive, R, None),
            "mech_dim": (integer(2), O, 4),
            "g": (nonneg, R, None),
            "omega_r": (nonneg, O, 0.0),
            "gamma": (nonneg, O, 0.0),
            "gamma_phi": (nonneg, O, 0.0),
            "gamma_m": (nonneg, O, 0.0),
            "n_th": (nonneg, O, 0.0),
            "flux": (number_list, O, None),
            "flux_offsets": (number_list, O, None),
            "time": (time_grid, R, None),
        },
        _run_rabi,
        _check_rabi,
        "vacuum Rabi oscillation at several flux biases",
    ),
    "semiclassical": Kind(
        {
            "omega_b": (positive, R, None),
            "omega_q": (positive, R, None),
            "G": (nonneg, R, None),
            "gamma_m": (nonneg, R, None),
            "gamma": (positive, R, None),
            "gamma_phi": (nonneg, O, 0.0),
            "omega_r": (positive, R, None),
            "detuning": (grid, R, None),
        },
        _run_semiclassical,
        doc="mean-field P_e versus drive detuning from the qubit",
    ),
    "jc_rabi": Kind(
        {
            "G": (positive, R, None),
            "delta": (real, O, 0.0),
            "mech_dim": (integer(2), O, 3),
            "gamma": (nonneg, O, 0.0),
            "gamma_m": (nonneg, O, 0.0),
            "time": (time_grid, R, None),
        },
        _run_jc_rabi,
        doc="Jaynes-Cummings population exchange from |e,0>",
    ),
    "numbersplit": Kind(
        {
            "chi": (nonneg, R, None),
            "delta_t": (real, R, None),
            "delta_m": (real, O, None),
            "epsilon": (nonneg, O, 0.0),
            "omega_r": (positive, R, None),
            "gamma": (positive, R, None),
            "gamma_b": (positive, R, None),
            "n_th": (nonneg, O, 0.0),
            "mech_dim": (integer(2), O, 20),
            "probe": (grid, R, None),
        },
        _run_numbersplit,
        doc="dispersive qubit spectroscopy of a driven mechanical mode",
    ),
    "encode": Kind(
        {
            "g0": (positive, R, None),
            "times": (number_list, R, None),
            "qubit_state": (choice("g", "e", "plus"), O, "g"),
            "dim": (integer(2), O, None),
        },
        _run_encode,
        doc="conditional displacement of the mechanics",
    ),
    "wigner": Kind(
        {
            "state": (choice("encode_g", "encode_e", "cat_g", "cat_e"), R, None),
            "amplitude": (nonneg, R, None),
            "x": (grid, R, None),
            "p": (grid, R, None),
            "dim": (integer(2), O, None),
        },
        _run_wigner,
        doc="Wigner function of encoded coherent or cat states",
    ),
    "force": Kind(
        {
            "g0": (positive, R, None),
            "tau": (positive, R, None),
            "loop": (choice("square", "echo"), O, "echo"),
            "mirrored": (boolean, O, False),
            "eta": (number_list, R, None),
            "dim": (integer(10), O, 40),
        },
        _run_force,
        doc="geometric-phase force sensing",
    ),
    "transduce": Kind(
        {
            "g_tm": (positive, R, None),
            "g_alpha": (positive, R, None),
            "gamma": (nonneg, O, 0.0),
            "gamma_m": (nonneg, O, 0.0),
            "kappa": (nonneg, O, 0.0),
            "n_th": (nonneg, O, 0.0),
            "mech_dim": (integer(2), O, 3),
            "cavity_dim": (integer(2), O, 3),
            "time": (time_grid, R, None),
        },
        _run_transduce,
        doc="double-swap qubit to optics transfer",
    ),
    "optical_readout": Kind(
        {
            "beta_re": (real, O, 0.0),
            "beta_im": (real, R, None),
            "g_alpha": (positive, R, None),
            "reference": (real, O, None),
            "time": (time_grid, R, None),
        },
        _run_optical_readout,
        doc="photon number after swapping an encoded mechanical state into the cavity",
    ),
    "cold_bath": Kind(
        {
            "omega_b": (positive, R, None),
            "G": (nonneg, R, None),
            "omega_r": (nonneg, R, None),
            "gamma": (positive, R, None),
            "gamma_m": (nonneg, R, None),
            "n_th": (nonneg, R, None),
            "mech_dim": (integer(4), O, 15),
            "detuning": (number_list, R, None),
        },
        _run_cold_bath,
        doc="steady phonon number with a driven qubit as the bath",
    ),
    "sideband_rates": Kind(
        {
            "g_l": (nonneg, R, None),
            "g_alpha": (nonneg, R, None),
            "qubit_linewidth": (positive, R, None),
            "qubit_detuning": (real, O, 0.0),
            "kappa": (positive, R, None),
            "omega": (positive, R, None),
            "detuning": (grid, R, None),
        },
        _run_sideband_rates,
        doc="golden-rule cooling and heating rates versus cavity drive detuning",
    ),
}

SCENARIO_KINDS: dict[str, tuple[str, ...]] = {
    "spectrum": ("flux_sweep", "charge_sweep"),
    "avoided": ("avoided",),
    "dispersive": ("dispersive",),
    "rabi": ("rabi",),
    "modesplit": ("semiclassical", "jc_rabi"),
    "numbersplit": ("numbersplit",),
    "encode": ("encode",),
    "cat": ("wigner",),
    "force": ("force",),
    "transduce": ("transduce", "optical_readout"),
    "cool": ("cold_bath", "sideband_rates"),
}


def run_panel(name: str, kind: str, fields: dict) -> list[Table]:
    return KINDS[kind].run(name, fields)
