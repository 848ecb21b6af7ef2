"""Command-line runner: ``cmdb-mbqc run --config cfg.json`` and ``cmdb-mbqc bench --config cfg.json``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from pathlib import Path

from cmdb_mbqc.config import ConfigError, RunConfig, load_config
from cmdb_mbqc.scenarios import bench, run

EXIT_OK, EXIT_CONFIG, EXIT_CERT, EXIT_ORACLE = 0, 2, 3, 4


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _override(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if getattr(args, "oracle", False):
        changes["oracle"] = True
    if getattr(args, "out", None) is not None:
        changes["out_dir"] = args.out
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_run(args) -> int:
    cfg = _override(load_config(args.config), args)
    report = run(cfg)
    out = Path(cfg.out_dir)
    for t, dot in report.dots.items():
        atomic_write(out / f"graph_{t}.dot", dot)
    if report.outcomes:
        atomic_write(out / "outcomes.json", _dumps(report.outcomes))
    atomic_write(out / "report.json", _dumps(report.to_dict()))
    agg = report.aggregate
    summary = {k: agg[k] for k in ("trials", "pass_rate", "min_fidelity", "branches") if k in agg}
    print(f"{cfg.scenario}: {summary or agg} -> {out / 'report.json'}")
    for f in report.failures[:5]:
        print(f"FAILED {f}", file=sys.stderr)
    return report.exit_code


def cmd_bench(args) -> int:
    cfg = _override(load_config(args.config), args)
    table = bench(cfg)
    atomic_write(Path(cfg.out_dir) / "bench.json", _dumps(table))
    print(f"{table['chains']} chains x {table['sites_per_chain']} sites, {table['virtual_qubits']} virtual qubits")
    print(f"  wall {table['wall_s']:.1f} s, {table['qubits_per_s']:.0f} qubits/s")
    for phase, s in table["phase_s"].items():
        print(f"  {phase:<9} {s:8.2f} s")
    print(f"  tableau per chain {table['chain_memory_bytes']} B (model {table['chain_memory_model']} B)")
    print(f"  povm exponent {table['povm_exponent']:.2f}, memory exponent {table['memory_exponent']:.2f}")
    print(f"  peak rss {table['peak_rss_kb']} kB")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmdb-mbqc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--oracle", action="store_true")
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)
    b = sub.add_parser("bench", help="time the tableau pipeline at scale")
    b.add_argument("--config", required=True)
    b.add_argument("--seed", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
