"""
Command-line entry point: ``qbattery {simulate,sweep,fit,validate,hardware-map,heatmap}``.

Environment variables: ``QBATTERY_WORKERS`` (default sweep worker count) and
``QBATTERY_OUT_ROOT`` (base for relative ``--out`` paths).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ConfigSchemaError, load_toml, parse_run_config, parse_sweep_config
from .dicke_space import CorruptedStateError
from .manifest import config_hash, write_manifest
from .model import Interaction, Scenario
from .observables import DegenerateTimingError, write_series_csv
from .oracle import ORACLE_DISSIPATION, compare_engines
from .propagator import PhysicalityError, ResourceError
from .scaling import DomainError, InsufficientDataError, UnphysicalCoherenceError, classify_regime, fit_power_law, hardware_map
from .simulate import simulate
from .sweep import PARAM_FIELDS, export_heatmap, load_records, run_sweep, write_heatmap_csv

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAIL = 1  # physicality failure, failed validation, failed sweep points
EXIT_CONFIG = 2
EXIT_IO = 3

FIT_OBSERVABLES = ("e_max", "tau", "p_max", "s_q_max", "s_c_max", "s_q_final", "s_c_final")
_DEFAULT_GROUP = "interaction,scenario,g,kappa,gamma_minus,gamma_z"


def _err(msg: str) -> None:
    print(f"qbattery: {msg}", file=sys.stderr)


def _out_dir(path: str) -> Path:
    p = Path(path)
    root = os.environ.get("QBATTERY_OUT_ROOT")
    if root and not p.is_absolute():
        p = Path(root) / p
    return p


def _prepare_out(path: str) -> Path:
    out = _out_dir(path)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    probe.write_text("")
    probe.unlink()
    return out


def _load(path: str, parser):
    try:
        return parser(load_toml(path))
    except OSError as exc:
        raise ConfigSchemaError([f"cannot read config {path}: {exc.strerror or exc}"]) from None
    except ValueError as exc:  # includes TOML decode errors
        if isinstance(exc, ConfigSchemaError):
            raise
        raise ConfigSchemaError([f"{path}: {exc}"]) from None


def cmd_simulate(args) -> int:
    try:
        raw = load_toml(args.config)
    except OSError as exc:
        _err(f"cannot read config {args.config}: {exc}")
        return EXIT_CONFIG
    except ValueError as exc:
        _err(f"{args.config}: {exc}")
        return EXIT_CONFIG
    try:
        cfg = parse_run_config(raw)
    except ConfigSchemaError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    try:
        out = _prepare_out(args.out)
    except OSError as exc:
        _err(f"output directory {args.out} is not writable: {exc}")
        return EXIT_IO
    started = datetime.now(timezone.utc).isoformat()
    try:
        res = simulate(cfg.n_qubits, cfg.model, cfg.dissipation, cfg.initial, cfg.sim)
    except PhysicalityError as exc:
        _err(f"physicality failure: {exc}")
        return EXIT_FAIL
    except (CorruptedStateError, DegenerateTimingError, ResourceError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL
    write_series_csv(res.series, out / "series.csv")
    summary = {
        **res.summary.to_dict(),
        "fock_cutoff": res.space.fock_cutoff,
        "fock_converged": bool(res.fock_converged),
        "max_top_fock_pop": res.max_top_fock_pop,
        "config": raw,
        "config_hash": config_hash(raw),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if args.dump_trajectory:
        _write_diagnostics(res.trajectory, out / "diagnostics.csv")
    write_manifest(out, raw, extra={"command": "simulate"}, started=started)
    print(json.dumps(res.summary.to_dict(), sort_keys=True))
    return EXIT_OK


def _write_diagnostics(traj, path: Path) -> None:
    from .observables import _fmt

    cols = ("time", "trace_error", "hermiticity_error", "min_eigenvalue", "top_fock_pop")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(traj.times, traj.trace_error, traj.hermiticity_error, traj.min_eigenvalue, traj.top_fock_pop):
            w.writerow([_fmt(float(v)) for v in row])


def cmd_sweep(args) -> int:
    try:
        spec = _load(args.config, parse_sweep_config)
    except ConfigSchemaError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("QBATTERY_WORKERS", "1"))
    if workers < 1:
        _err("--workers must be >= 1")
        return EXIT_CONFIG
    try:
        out = _prepare_out(args.out)
    except OSError as exc:
        _err(f"output directory {args.out} is not writable: {exc}")
        return EXIT_IO
    records = run_sweep(spec, workers=workers, out_dir=out, resume=args.resume, write_series=args.series)
    failed = [r for r in records if r.status != "ok"]
    print(f"{len(records) - len(failed)}/{len(records)} points ok; records in {out / 'records.csv'}")
    for r in failed:
        _err(f"failed {dict(zip(PARAM_FIELDS, r.params))}: {r.error}")
    return EXIT_FAIL if failed else EXIT_OK


def _group_fits(records, observable: str, group_by: list[str]) -> list[dict]:
    groups: dict = {}
    for rec in records:
        if rec.status != "ok":
            continue
        row = rec.to_row()
        key = tuple(row[g] for g in group_by)
        groups.setdefault(key, []).append((row["n_qubits"], row[observable]))
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(v) for v in k)):
        group = dict(zip(group_by, key))
        regime = ""
        gm, gz = group.get("gamma_minus"), group.get("gamma_z")
        if gm and gz and gm > 0 and gz > 0:
            regime = classify_regime(gm, gz).value
        try:
            fit = fit_power_law(groups[key], observable=observable, regime=regime)
            out.append({"group": group, **fit.to_dict()})
        except (InsufficientDataError, DomainError) as exc:
            out.append({"group": group, "observable": observable, "regime": regime, "error": str(exc)})
    return out


def cmd_fit(args) -> int:
    group_by = [g for g in args.group_by.split(",") if g] if args.group_by else []
    bad = [g for g in group_by if g not in PARAM_FIELDS or g == "n_qubits"]
    if bad:
        _err(f"invalid --group-by fields {bad}; choose from {[f for f in PARAM_FIELDS if f != 'n_qubits']}")
        return EXIT_CONFIG
    try:
        records = load_records(args.records)
    except (OSError, KeyError, ValueError) as exc:
        _err(f"cannot read records {args.records}: {exc}")
        return EXIT_IO
    fits = _group_fits(records, args.observable, group_by)
    text = json.dumps(fits, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_FAIL if any("error" in f for f in fits) else EXIT_OK


def cmd_validate(args) -> int:
    ns = [args.n] if args.n else [1, 2, 3]
    diss = ORACLE_DISSIPATION if args.suite == "full" else ORACLE_DISSIPATION[1:2]
    header = f"{'N':>2}  {'model':<14} {'scenario':<9} {'kappa':>7} {'gamma-':>7} {'gamma_z':>7}  {'max dev':>10}  result"
    print(header)
    print("-" * len(header))
    all_ok = True
    for n in ns:
        for inter in (Interaction.DICKE, Interaction.TAVIS_CUMMINGS):
            for scen in (Scenario.UNDRIVEN, Scenario.DRIVEN):
                for d in diss:
                    cmp = compare_engines(n, inter, scen, d)
                    ok = cmp.passed(args.tol)
                    all_ok &= ok
                    print(
                        f"{n:>2}  {inter.value:<14} {scen.value:<9} {d.kappa:>7.3g} {d.gamma_minus:>7.3g} "
                        f"{d.gamma_z:>7.3g}  {cmp.worst:>10.3e}  {'PASS' if ok else 'FAIL'}"
                    )
    print("all passed" if all_ok else "FAILURES present")
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_hardware_map(args) -> int:
    try:
        rates = hardware_map(args.t1, args.t2)
    except (UnphysicalCoherenceError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    d = rates.to_dict()
    if rates.gamma_minus > 0 and rates.gamma_z > 0:
        d["regime"] = classify_regime(rates.gamma_minus, rates.gamma_z).value
    print(json.dumps(d, indent=2))
    return EXIT_OK


def _parse_where(items) -> dict:
    where = {}
    for item in items or []:
        key, _, val = item.partition("=")
        if key not in PARAM_FIELDS or not _:
            raise ValueError(f"bad --where {item!r}; expected <param>=<value>")
        where[key] = val if key in ("interaction", "scenario") else (int(val) if key == "n_qubits" else float(val))
    return where


def cmd_heatmap(args) -> int:
    try:
        where = _parse_where(args.where)
        records = load_records(args.records)
        rows = export_heatmap(records, args.x, args.y, args.value, args.normalization, where)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        write_heatmap_csv(rows, out, args.x, args.y, args.value)
        meta = {
            "records": str(args.records),
            "x": args.x,
            "y": args.y,
            "value": args.value,
            "normalization": args.normalization,
            "where": where,
            "tool_version": __version__,
        }
        out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        _err(f"cannot write {out}: {exc}")
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbattery", description="Open-system simulation of collective quantum batteries.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one configuration", description="Run one configuration from a TOML file.")
    s.add_argument("--config", required=True, help="run configuration (TOML)")
    s.add_argument("--out", required=True, help="output directory for series.csv, summary.json, manifest.json")
    s.add_argument("--dump-trajectory", action="store_true", help="also write per-sample physicality diagnostics.csv")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run a parameter grid", description="Run a parameter grid from a TOML file.")
    s.add_argument("--config", required=True, help="sweep configuration (TOML)")
    s.add_argument("--out", required=True, help="output directory for records.csv, checkpoint.jsonl, manifest.json")
    s.add_argument("--workers", type=int, default=None, help="worker processes (default: $QBATTERY_WORKERS or 1)")
    s.add_argument("--resume", action="store_true", help="skip grid points already completed in the checkpoint")
    s.add_argument("--series", action="store_true", help="also write one series CSV per grid point")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit", help="fit power-law exponents", description="Fit value ~ N**alpha per parameter group.")
    s.add_argument("--records", required=True, help="records.csv from a sweep")
    s.add_argument("--observable", required=True, choices=FIT_OBSERVABLES, help="summary column to fit")
    s.add_argument("--group-by", default=_DEFAULT_GROUP, help=f"comma-separated parameters (default: {_DEFAULT_GROUP})")
    s.add_argument("--out", help="also write the JSON array to this file")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("validate", help="compare against the full-space oracle", description="Compare the Dicke-basis engine with the brute-force engine.")
    s.add_argument("--n", type=int, choices=(1, 2, 3), help="qubit count (default: 1, 2 and 3)")
    s.add_argument("--suite", choices=("quick", "full"), default="quick", help="quick: weak dissipation only; full: all three dissipation settings")
    s.add_argument("--tol", type=float, default=1e-6, help="absolute tolerance on every series (default 1e-6)")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("hardware-map", help="map T1/T2 to model rates", description="Convert coherence times to relaxation and dephasing rates.")
    s.add_argument("--t1", type=float, required=True, help="energy relaxation time T1")
    s.add_argument("--t2", type=float, required=True, help="coherence time T2 (must not exceed 2*T1)")
    s.set_defaults(func=cmd_hardware_map)

    s = sub.add_parser("heatmap", help="export a long-format heatmap table", description="Export an (x, y, value) table from records.csv.")
    s.add_argument("--records", required=True, help="records.csv from a sweep")
    s.add_argument("--x", required=True, choices=PARAM_FIELDS, help="x-axis parameter")
    s.add_argument("--y", required=True, choices=PARAM_FIELDS, help="y-axis parameter")
    s.add_argument("--value", required=True, choices=FIT_OBSERVABLES, help="summary column")
    s.add_argument("--normalization", choices=("raw", "row_max", "panel_max"), default="raw")
    s.add_argument("--where", action="append", metavar="PARAM=VALUE", help="filter records (repeatable)")
    s.add_argument("--out", required=True, help="output CSV; a .json sidecar is written next to it")
    s.set_defaults(func=cmd_heatmap)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
