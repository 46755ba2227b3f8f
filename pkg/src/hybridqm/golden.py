"""Deterministic CSV output and golden-file regression."""
from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ScenarioConfig, load_config
from .scenarios import Table, run_panel

TOLERANCES = {"eigen": 1e-9, "trajectory": 1e-6, "peaks": 0.01}
GOLDEN_FILE = "golden.json"
CONFIG_FILE = "config.yaml"


def format_value(v: float) -> str:
    return f"{v + 0.0:.16e}"  # + 0.0 folds -0.0 into 0.0


def table_to_csv(table: Table) -> str:
    lines = [",".join(table.columns)]
    lines += [",".join(format_value(float(v)) for v in row) for row in table.data]
    return "\n".join(lines) + "\n"


def write_table(table: Table, directory: Path) -> Path:
    path = Path(directory) / f"{table.name}.csv"
    path.write_text(table_to_csv(table))
    return path


def read_csv(path: Path) -> tuple[tuple[str, ...], np.ndarray]:
    text = Path(path).read_text().splitlines()
    cols = tuple(text[0].split(","))
    rows = [[float(v) for v in line.split(",")] for line in text[1:] if line.strip()]
    data = np.array(rows, dtype=float).reshape(len(rows), len(cols))
    return cols, data


def run_config(cfg: ScenarioConfig, threads: int = 1) -> list[Table]:
    """All panels in declaration order; panels are independent so they may run concurrently."""
    items = list(cfg.panels.items())
    if threads > 1 and len(items) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda it: run_panel(it[0], *it[1]), items))
    else:
        results = [run_panel(name, kind, fields) for name, (kind, fields) in items]
    tables = [t for res in results for t in res]
    names = [t.name for t in tables]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate table names {names}")
    return tables


# --- comparison ----------------------------------------------------------------


@dataclass(frozen=True)
class TableCheck:
    table: str
    passed: bool
    detail: str


def _peak_scale(expected: np.ndarray, companion: Optional[Table]) -> float:
    pos = np.sort(expected[:, 0])
    if len(pos) >= 2:
        return float(np.min(np.diff(pos)))
    if companion is not None:
        x = companion.data[:, 0]
        return float(x.max() - x.min())
    return 1.0


def compare_table(actual: Table, exp_cols, expected: np.ndarray, tol_class: str, companion: Optional[Table] = None) -> TableCheck:
    if tuple(exp_cols) != actual.columns:
        return TableCheck(actual.name, False, f"columns differ: {actual.columns} vs {tuple(exp_cols)}")
    if expected.shape != actual.data.shape:
        return TableCheck(actual.name, False, f"shape {actual.data.shape} vs expected {expected.shape}")
    if expected.size == 0:
        return TableCheck(actual.name, True, "empty")
    if tol_class == "peaks":
        tol = TOLERANCES["peaks"] * _peak_scale(expected, companion)
    else:
        tol = TOLERANCES[tol_class]
    nan_mismatch = np.isnan(expected) != np.isnan(actual.data)
    if np.any(nan_mismatch):
        return TableCheck(actual.name, False, "NaN pattern differs")
    diff = np.where(np.isnan(expected), 0.0, np.abs(actual.data - expected))
    worst = float(np.max(diff))
    ok = worst <= tol
    return TableCheck(actual.name, ok, f"max |diff| {worst:.3e} (tol {tol:.1e}, {tol_class})")


@dataclass(frozen=True)
class GoldenResult:
    golden: str
    status: str  # PASS, FAIL, STALE, SKIPPED
    checks: tuple
    message: str = ""


def make_golden(config_path, directory, golden_id: Optional[str] = None, figure: Optional[str] = None) -> Path:
    cfg = load_config(config_path)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for old in directory.glob("*.csv"):
        old.unlink()
    if Path(config_path).resolve() != (directory / CONFIG_FILE).resolve():
        shutil.copyfile(config_path, directory / CONFIG_FILE)
    tables = run_config(cfg)
    for t in tables:
        write_table(t, directory)
    meta = {
        "id": golden_id or directory.name,
        "figure": figure,
        "scenario": cfg.scenario,
        "fingerprint": cfg.fingerprint,
        "tables": {t.name: t.tolerance for t in tables},
    }
    (directory / GOLDEN_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return directory


def verify_golden(directory) -> GoldenResult:
    directory = Path(directory)
    name = directory.name
    meta_path = directory / GOLDEN_FILE
    cfg_path = directory / CONFIG_FILE
    if not meta_path.exists() or not cfg_path.exists():
        return GoldenResult(name, "SKIPPED", (), "missing golden.json or config.yaml")
    meta = json.loads(meta_path.read_text())
    missing = [t for t in meta["tables"] if not (directory / f"{t}.csv").exists()]
    if missing:
        return GoldenResult(name, "SKIPPED", (), f"missing CSV for {missing}")
    cfg = load_config(cfg_path)
    if cfg.fingerprint != meta["fingerprint"]:
        return GoldenResult(name, "STALE", (), "config fingerprint changed; regenerate this golden")
    actual = {t.name: t for t in run_config(cfg)}
    checks = []
    for tname, tol_class in meta["tables"].items():
        if tname not in actual:
            checks.append(TableCheck(tname, False, "table not produced"))
            continue
        cols, data = read_csv(directory / f"{tname}.csv")
        companion = actual.get(tname[: -len("_peaks")]) if tname.endswith("_peaks") else None
        checks.append(compare_table(actual[tname], cols, data, tol_class, companion))
    extra = sorted(set(actual) - set(meta["tables"]))
    if extra:
        checks.append(TableCheck(",".join(extra), False, "unexpected extra tables"))
    status = "PASS" if all(c.passed for c in checks) else "FAIL"
    return GoldenResult(name, status, tuple(checks))


def golden_dirs(root) -> list[Path]:
    root = Path(root)
    return sorted(p for p in root.iterdir() if p.is_dir())
