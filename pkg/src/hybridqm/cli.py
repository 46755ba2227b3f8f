"""Command-line interface: ``hybridqm run | verify | list-scenarios | make-golden``.

Exit codes: 0 success, 1 golden mismatch, 2 invalid input, 3 numerical guard.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import NumericalGuardError, ValidationError
from .golden import golden_dirs, make_golden, run_config, verify_golden, write_table
from .scenarios import KINDS, SCENARIO_KINDS

OUT_ENV = "HYBRIDQM_OUT"
EXIT_OK, EXIT_MISMATCH, EXIT_VALIDATION, EXIT_GUARD = 0, 1, 2, 3


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = args.out or os.environ.get(OUT_ENV) or str(Path("hybridqm-out") / Path(args.config).stem)
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {out}: {exc.strerror}") from None
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tables = run_config(cfg, threads=args.threads)
    wall = time.perf_counter() - start
    written = [write_table(t, out).name for t in tables]
    manifest = {
        "scenario": cfg.scenario,
        "config": str(args.config),
        "fingerprint": cfg.fingerprint,
        "version": __version__,
        "wall_time_s": round(wall, 3),
        "tables": written,
        "guard_warnings": sorted({str(w.message) for w in caught}),
    }
    (out / "run-manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{cfg.scenario}: wrote {len(written)} table(s) to {out} in {wall:.2f} s")
    return EXIT_OK


def _cmd_verify(args) -> int:
    start = time.perf_counter()
    failed = 0
    for d in golden_dirs(args.golden_dir):
        t0 = time.perf_counter()
        res = verify_golden(d)
        dt = time.perf_counter() - t0
        print(f"{res.status:8s} {res.golden:28s} {dt:7.2f} s {res.message}")
        for c in res.checks:
            print(f"    {'ok  ' if c.passed else 'FAIL'} {c.table}: {c.detail}")
        failed += res.status in ("FAIL", "STALE")
    total = time.perf_counter() - start
    print(f"{'FAILED' if failed else 'all passed'} ({failed} failing) in {total:.1f} s")
    return EXIT_MISMATCH if failed else EXIT_OK


def _cmd_list(args) -> int:
    for scenario, kinds in SCENARIO_KINDS.items():
        print(scenario)
        for k in kinds:
            print(f"    {k:16s} {KINDS[k].doc}")
    return EXIT_OK


def _cmd_make_golden(args) -> int:
    path = make_golden(args.config, args.directory, args.id, args.figure)
    print(f"golden written to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybridqm", description="Hybrid qubit/mechanics/optics scenario runner")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario config and write CSV tables")
    r.add_argument("config")
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./hybridqm-out/<config>)")
    r.add_argument("--threads", type=int, default=1)
    r.set_defaults(func=_cmd_run)
    v = sub.add_parser("verify", help="rerun every golden under a directory and compare")
    v.add_argument("golden_dir")
    v.set_defaults(func=_cmd_verify)
    ls = sub.add_parser("list-scenarios", help="list scenarios and panel kinds")
    ls.set_defaults(func=_cmd_list)
    g = sub.add_parser("make-golden", help="(re)generate a golden record from a config")
    g.add_argument("config")
    g.add_argument("directory")
    g.add_argument("--id")
    g.add_argument("--figure")
    g.set_defaults(func=_cmd_make_golden)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
