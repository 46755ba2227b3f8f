"""Acceptance criteria 1-12, each printed as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
under output capture) or directly with ``python tests/test_acceptance.py``.
"""
import filecmp
import math
import time

import numpy as np
import pytest

from hybridqm import circuits, dynamics, optomech, protocols, qubit_mech, readout
from hybridqm.cli import main as cli_main
from hybridqm.config import load_config
from hybridqm.golden import golden_dirs, run_config, table_to_csv, verify_golden
from hybridqm.operators import SpaceDims, basis_ket, coherent, destroy, embed, log_negativity, pauli, wigner_at


@pytest.fixture
def report(capsys, request):
    """Print one line per criterion, then fail the test if it did not pass."""

    def emit(number: int, title: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}")
        assert ok, detail

    return emit


def test_01_spectra(report):
    q = circuits.TransmonParams(5.0, 5.0, 0.5)
    flux = np.linspace(-1, 1, 201)
    t0 = time.perf_counter()
    sw = circuits.spectrum_sweep(q, flux, 4)
    t_transmon = time.perf_counter() - t0
    f01 = sw.transitions[:, 0]
    periodic = np.max(np.abs(f01[:100] - f01[100:200])) < 1e-9
    top = flux[np.argmax(f01)]
    estimate = math.sqrt(8 * 0.5 * 10.0) - 0.5
    rel = abs(f01.max() - estimate) / estimate

    fx = np.linspace(-1, 1, 201)
    t0 = time.perf_counter()
    base = circuits.spectrum_sweep(circuits.FluxoniumParams(10, 1.2, 1, 60), fx, 4, check_truncation=True)
    t_flux = time.perf_counter() - t0
    doubled = circuits.spectrum_sweep(circuits.FluxoniumParams(10, 1.2, 1, 120), fx, 4)
    conv = float(np.max(np.abs(base.energies - doubled.energies)))

    ok = periodic and abs(top - round(top)) < 1e-12 and rel < 0.02 and conv < 1e-6 and max(t_transmon, t_flux) < 10
    report(
        1,
        "spectra",
        ok,
        f"f01 max {f01.max():.5f} at flux {top:+.2f} vs estimate {estimate:.5f} (rel {rel:.2%}); "
        f"fluxonium doubling diff {conv:.1e} GHz; sweep times {t_transmon:.2f}/{t_flux:.2f} s",
    )


def test_02_charge_dispersion(report):
    ratios = (1, 5, 10, 50)
    disp = [circuits.charge_dispersion(0.5, 4 * 0.5 * r) for r in ratios]
    monotone = all(a > b for a, b in zip(disp, disp[1:]))
    ok = monotone and disp[-1] < 1e-3 * disp[0]
    report(2, "charge dispersion", ok, " ".join(f"r={r}:{d:.2e}" for r, d in zip(ratios, disp)))


def test_03_dispersive_shifts(report):
    q = circuits.TransmonParams(5.0, 5.0, 0.5)
    worst = math.inf
    for flux in (0.0, 0.1, 0.2):
        eig = circuits.diagonalize(q, flux)
        errs = []
        for g in (0.05, 0.025):
            cav = readout.CavitySpec(eig.f01 - 1.0, g)
            sw = readout.sw_shifts(eig, cav)
            ex = readout.exact_shift_oracle(eig, cav, levels=sw.levels_used)
            errs.append(abs(sw.readout_pull - (ex[1] - ex[0])) / abs(ex[1] - ex[0]))
        worst = min(worst, errs[0] / errs[1])
    report(3, "dispersive shifts", worst >= 3, f"smallest error reduction on halving g: {worst:.2f}x (need >= 3)")


def test_04_avoided_crossing(report):
    q = circuits.TransmonParams(5.0, 5.0, 0.5)
    mech = qubit_mech.MechMode(4.5, 4)
    grid = np.linspace(0.278, 0.284, 61)
    full = qubit_mech.avoided_crossing(q, mech, 0.001, grid)
    half = qubit_mech.avoided_crossing(q, mech, 0.0005, grid)
    rel = abs(full.gap / (2 * 0.001 * full.n_ge) - 1)
    lin = abs(half.gap / full.gap - 0.5) / 0.5
    report(
        4,
        "avoided crossing",
        rel < 0.02 and lin < 0.01,
        f"gap {full.gap * 1e3:.5f} MHz vs 2 g |n_ge| {2e3 * 0.001 * full.n_ge:.5f} MHz (rel {rel:.1e}); halving g off by {lin:.1e}",
    )


def test_05_vacuum_rabi(report):
    g = 0.0005
    model = dynamics.jc_lindblad_model(qubit_mech.JCModel(0.0, 0.0, g), 3, dynamics.QubitRates())
    grid = dynamics.TimeGrid(0, 1 / (4 * g), 3)  # quarter and half of the full transfer
    traj = dynamics.lindblad_evolve(model, basis_ket(model.space, (1, 0)), grid)
    pe = 0.5 * (traj.expect(embed(pauli("z"), 0, model.space)) + 1)
    ln = log_negativity(traj.rho(1))
    ok = pe[-1] < 1e-6 and abs(ln - 1) < 1e-4
    report(5, "vacuum Rabi", ok, f"P_e at full transfer {pe[-1]:.1e}; log-negativity at half {ln:.6f}")


def test_06_open_system_oracle(report):
    rates = dynamics.QubitRates(gamma=0.002, gamma_phi=0.001, gamma_m=0.001, n_th=0.5)
    model = dynamics.jc_lindblad_model(qubit_mech.JCModel(0.003, 0.0, 0.01), 6, rates, omega_r=0.005)
    grid = dynamics.TimeGrid(0, 300, 31)
    rho0 = basis_ket(model.space, (1, 0))
    err = float(np.max(np.abs(dynamics.lindblad_evolve(model, rho0, grid).states - dynamics.expm_trajectory(model, rho0, grid))))

    dim = 12
    b = destroy(dim)
    bath = dynamics.LindbladModel(0 * (b.dag() @ b), (), 0.5, b, 0.01)
    n_ss = (b.dag() @ b).expect(dynamics.steady_state(bath)).real
    ok = err < 1e-6 and abs(n_ss - 0.5) < 1e-4
    report(6, "open-system oracle", ok, f"RK4 vs expm max diff {err:.1e} (dim 12); thermal <n> {n_ss:.6f} vs 0.5")


def test_07_mode_splitting(report):
    p = dynamics.SemiclassicalParams(4.5, 4.5, 0.0075, 0.001, 0.001, 0.0, 0.0001)
    det = np.linspace(-0.02, 0.02, 161)
    sp = dynamics.semiclassical_spectrum(p, 4.5 + det)
    peaks = sp.peaks()
    sep = peaks[-1] - peaks[0] if len(peaks) == 2 else float("nan")
    ok = len(peaks) == 2 and abs(sep - 0.015) <= 0.001
    report(7, "mode splitting", ok, f"{len(peaks)} peaks, separation {sep * 1e3:.3f} MHz (target 15 +- 1)")


def test_08_number_splitting(report):
    strong = dynamics.NumberSplitParams(0.003, -0.003, 0.0001, 0.0001, 0.0001, 0.0001, dim=20)
    probe = np.linspace(-0.006, 0.022, 281)
    peaks = dynamics.find_spectral_peaks(probe, dynamics.number_splitting(strong, probe).p_e, 0.02)
    spacing = np.diff(peaks)
    strong_ok = len(peaks) >= 3 and np.all(np.abs(spacing - 0.006) <= 0.05 * 0.006)

    weak = dynamics.NumberSplitParams(0.0001, 0.0, 0.0001, 0.0001, 0.0001, 0.0001, dim=20)
    wprobe = np.linspace(-0.001, 0.002, 121)
    wpeaks = dynamics.find_spectral_peaks(wprobe, dynamics.number_splitting(weak, wprobe).p_e, 0.02)
    pulled = math.nan
    weak_ok = len(wpeaks) == 1
    if weak_ok:
        model = dynamics.number_splitting_model(weak, float(wpeaks[0]))
        nb = embed(destroy(20), 1, model.space)
        n_mean = (nb.dag() @ nb).expect(dynamics.steady_state(model)).real
        pulled = 2 * weak.chi * n_mean
        weak_ok = abs(wpeaks[0] - pulled) <= 0.1 * pulled
    report(
        8,
        "number splitting",
        bool(strong_ok and weak_ok),
        f"strong spacings {np.round(spacing * 1e3, 3).tolist()} MHz (6 +- 5%); "
        f"weak: {len(wpeaks)} peak at {wpeaks[0] * 1e3 if len(wpeaks) else math.nan:.3f} MHz vs 2 chi <n> {pulled * 1e3:.3f} MHz",
    )


def test_09_protocols(report):
    g0, t = 0.001, 200.0
    fid = []
    for state, sign in (("g", 1), ("e", -1)):
        run = protocols.encode(g0, t, state)
        target = sign * 1j * 2 * math.pi * g0 * t
        ok_mean = abs(run.mean_amplitude - target) < 1e-9
        fid.append(abs(coherent(target, run.joint.space.dims[1]).overlap(run.mechanical)) ** 2 if ok_mean else 0.0)
    beta = 2.0
    even = protocols.cat_prepare(beta / (2 * math.pi), 1.0, "g")
    odd = protocols.cat_prepare(beta / (2 * math.pi), 1.0, "e")
    p_g, p_e = protocols.cat_probabilities(beta)
    w0 = wigner_at(odd.state.dm(), 0j)
    prob_err = max(abs(even.probability - p_g), abs(odd.probability - p_e))
    par_err = max(abs(even.parity - 1), abs(odd.parity + 1))
    ok = min(fid) > 1 - 1e-8 and par_err < 1e-12 and abs(w0 + 2 / math.pi) < 1e-3 and prob_err < 1e-9
    report(
        9,
        "protocols",
        ok,
        f"encode infidelity {1 - min(fid):.1e}; parity err {par_err:.1e}; odd W(0) {w0:.6f}; prob err {prob_err:.1e}",
    )


def test_10_transduction(report):
    rep = optomech.transduce(0.002, 0.001)
    rel = abs(rep.t2 - rep.t2_oracle) / rep.t2_oracle
    ok = rep.fidelity > 0.999 and rel < 1e-3
    report(10, "transduction", ok, f"fidelity {rep.fidelity:.9f}; beam-splitter time {rep.t2:.4f} ns vs oracle {rep.t2_oracle:.4f} (rel {rel:.1e})")


def test_11_cooling(report):
    def bath(det):
        c = protocols.CoolingSetup(1.0, 0.05, 0.2, det, 0.2, 1e-4, 1.0, dim=15)
        return protocols.cold_bath_cooling_check(c).n_steady

    def ratio(det):
        return optomech.cooling_rates(0.002, 0.001, (0.01, det), (0.1, det), 1.0).ratio

    n_red, n_blue = bath(1.0), bath(-1.0)  # qubit above / below the drive by omega_b
    r_red, r_blue = ratio(-1.0), ratio(1.0)  # drive below / above resonance by Omega
    ok = n_red < 1.0 < n_blue and r_red > 1 > r_blue
    report(11, "cooling", ok, f"<n> red {n_red:.4f} / blue {n_blue:.3f} vs n_th 1; Gamma-/Gamma+ red {r_red:.3g} / blue {r_blue:.3g}")


def test_12_determinism(report, goldens, tmp_path):
    identical = True
    for d in golden_dirs(goldens):
        cfg = load_config(d / "config.yaml")
        first = [table_to_csv(t) for t in run_config(cfg)]
        second = [table_to_csv(t) for t in run_config(cfg)]
        identical &= first == second
    cfg = goldens / "fig11" / "config.yaml"
    for name in ("x", "y"):
        cli_main(["run", str(cfg), "--out", str(tmp_path / name)])
    same_files = filecmp.cmpfiles(tmp_path / "x", tmp_path / "y", ["a.csv", "a_summary.csv", "b.csv", "b_summary.csv"], shallow=False)[0]
    identical &= len(same_files) == 4

    t0 = time.perf_counter()
    statuses = {d.name: verify_golden(d).status for d in golden_dirs(goldens)}
    elapsed = time.perf_counter() - t0
    all_pass = all(s == "PASS" for s in statuses.values())
    bad = [k for k, v in statuses.items() if v != "PASS"]
    report(
        12,
        "determinism",
        identical and all_pass and elapsed < 300,
        f"reruns byte-identical: {identical}; verify {len(statuses)} goldens in {elapsed:.1f} s, failing {bad or 'none'}",
    )


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
