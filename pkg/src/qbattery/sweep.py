"""
Parameter-grid runs with streamed checkpoints, canonical CSV output and
heatmap-ready long tables.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .model import DissipationConfig, DriveConfig, InitialStateSpec, Interaction, ModelConfig, Scenario
from .observables import ObservableSummary, write_series_csv
from .propagator import SimulationConfig
from .simulate import simulate

__all__ = [
    "PARAM_FIELDS",
    "RATE_GRID",
    "RECORD_COLUMNS",
    "SweepRecord",
    "SweepSpec",
    "standard_grids",
    "export_heatmap",
    "load_records",
    "run_sweep",
    "write_heatmap_csv",
    "write_records_csv",
]

RATE_GRID = (1e-3, 1e-2, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
N_GRID = tuple(range(5, 55, 5))
G_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
WEAK_RATE = 1e-3

PARAM_FIELDS = ("interaction", "scenario", "n_qubits", "g", "kappa", "gamma_minus", "gamma_z")
SUMMARY_FIELDS = ("e_max", "tau", "p_max", "s_q_max", "s_c_max", "s_q_final", "s_c_final", "flat_energy")
RECORD_COLUMNS = (
    PARAM_FIELDS
    + ("status", "error")
    + SUMMARY_FIELDS
    + ("fock_cutoff", "fock_converged", "max_top_fock_pop")
)
_INT_FIELDS = {"n_qubits", "fock_cutoff"}
_BOOL_FIELDS = {"flat_energy", "fock_converged"}
_STR_FIELDS = {"interaction", "scenario", "status", "error"}


@dataclass(frozen=True)
class SweepSpec:
    n_list: tuple
    g_list: tuple = (0.1,)
    kappa_list: tuple = (1e-3,)
    gamma_minus_list: tuple = (1e-3,)
    gamma_z_list: tuple = (1e-3,)
    scenarios: tuple = (Scenario.DRIVEN,)
    interactions: tuple = (Interaction.TAVIS_CUMMINGS,)
    sim: SimulationConfig = field(default_factory=SimulationConfig)
    omega_q: float = 1.0
    omega_c: float = 1.0
    drive: DriveConfig = field(default_factory=DriveConfig)
    cavity_fock: int | None = None  # None -> N photons in the undriven scenario

    def __post_init__(self):
        for name in ("n_list", "g_list", "kappa_list", "gamma_minus_list", "gamma_z_list", "scenarios", "interactions"):
            val = tuple(getattr(self, name))
            if not val:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "scenarios", tuple(Scenario(s) for s in self.scenarios))
        object.__setattr__(self, "interactions", tuple(Interaction(i) for i in self.interactions))

    def grid(self) -> list[tuple]:
        """Canonically ordered parameter tuples in :data:`PARAM_FIELDS` order."""
        pts = itertools.product(
            sorted(i.value for i in self.interactions),
            sorted(s.value for s in self.scenarios),
            sorted(int(n) for n in self.n_list),
            sorted(float(x) for x in self.g_list),
            sorted(float(x) for x in self.kappa_list),
            sorted(float(x) for x in self.gamma_minus_list),
            sorted(float(x) for x in self.gamma_z_list),
        )
        return sorted(set(pts))

    def to_dict(self) -> dict:
        sim = asdict(self.sim)
        sim["fock_policy"] = {"kind": type(self.sim.fock_policy).__name__, **asdict(self.sim.fock_policy)}
        return {
            "n_list": list(self.n_list),
            "g_list": list(self.g_list),
            "kappa_list": list(self.kappa_list),
            "gamma_minus_list": list(self.gamma_minus_list),
            "gamma_z_list": list(self.gamma_z_list),
            "scenarios": [s.value for s in self.scenarios],
            "interactions": [i.value for i in self.interactions],
            "omega_q": self.omega_q,
            "omega_c": self.omega_c,
            "drive": asdict(self.drive),
            "cavity_fock": self.cavity_fock,
            "sim": sim,
        }


def standard_grids(n_list=N_GRID, sim: SimulationConfig | None = None, **common) -> dict[str, "SweepSpec"]:
    """The three standard scans, each over both models and both scenarios.

    ``coupling``: ``g`` in :data:`G_GRID` with all rates weak; ``cavity``:
    ``kappa`` in :data:`RATE_GRID` at ``g = 0.1``; ``decoherence``: ``gamma-``
    and ``gamma_z`` both over :data:`RATE_GRID` at ``g = 0.1``.
    """
    base = dict(
        n_list=tuple(n_list),
        scenarios=tuple(Scenario),
        interactions=tuple(Interaction),
        sim=sim or SimulationConfig(),
        **common,
    )
    weak = (WEAK_RATE,)
    return {
        "coupling": SweepSpec(g_list=G_GRID, kappa_list=weak, gamma_minus_list=weak, gamma_z_list=weak, **base),
        "cavity": SweepSpec(g_list=(0.1,), kappa_list=RATE_GRID, gamma_minus_list=weak, gamma_z_list=weak, **base),
        "decoherence": SweepSpec(g_list=(0.1,), kappa_list=weak, gamma_minus_list=RATE_GRID, gamma_z_list=RATE_GRID, **base),
    }


@dataclass
class SweepRecord:
    params: tuple
    status: str = "ok"
    error: str = ""
    summary: ObservableSummary | None = None
    fock_cutoff: int | None = None
    fock_converged: bool | None = None
    max_top_fock_pop: float | None = None
    wall_time: float = 0.0

    @property
    def key(self) -> tuple:
        return tuple(self.params)

    def to_row(self) -> dict:
        row = dict(zip(PARAM_FIELDS, self.params))
        row.update(status=self.status, error=self.error)
        summ = self.summary.to_dict() if self.summary is not None else {}
        for k in SUMMARY_FIELDS:
            row[k] = summ.get(k)
        row.update(fock_cutoff=self.fock_cutoff, fock_converged=self.fock_converged, max_top_fock_pop=self.max_top_fock_pop)
        return row

    def to_json(self) -> str:
        return json.dumps({**self.to_row(), "wall_time": self.wall_time})

    @classmethod
    def from_row(cls, row: dict) -> "SweepRecord":
        params = tuple(row[k] for k in PARAM_FIELDS)
        summary = None
        if row.get("status") == "ok":
            summary = ObservableSummary(**{k: row[k] for k in SUMMARY_FIELDS})
        return cls(
            params=params,
            status=row.get("status", "ok"),
            error=row.get("error") or "",
            summary=summary,
            fock_cutoff=row.get("fock_cutoff"),
            fock_converged=row.get("fock_converged"),
            max_top_fock_pop=row.get("max_top_fock_pop"),
            wall_time=float(row.get("wall_time") or 0.0),
        )


def _series_name(params: tuple) -> str:
    inter, scen, n, g, k, gm, gz = params
    return f"series_{inter}_{scen}_N{n}_g{g!r}_k{k!r}_gm{gm!r}_gz{gz!r}.csv"


def _run_point(spec: SweepSpec, params: tuple, series_dir: str | None) -> SweepRecord:
    inter, scen, n, g, kappa, gm, gz = params
    t0 = time.perf_counter()
    model = ModelConfig(g=g, interaction=inter, omega_q=spec.omega_q, omega_c=spec.omega_c, drive=spec.drive)
    fock = spec.cavity_fock if spec.cavity_fock is not None else n
    init = InitialStateSpec(Scenario(scen), cavity_fock=fock if scen == Scenario.UNDRIVEN.value else 0)
    try:
        res = simulate(n, model, DissipationConfig(kappa, gm, gz), init, spec.sim)
    except Exception as exc:  # recorded per point, never fatal for the sweep
        return SweepRecord(params, status="error", error=f"{type(exc).__name__}: {exc}", wall_time=time.perf_counter() - t0)
    if series_dir is not None:
        write_series_csv(res.series, Path(series_dir) / _series_name(params))
    return SweepRecord(
        params,
        summary=res.summary,
        fock_cutoff=res.space.fock_cutoff,
        fock_converged=bool(res.fock_converged),
        max_top_fock_pop=res.max_top_fock_pop,
        wall_time=time.perf_counter() - t0,
    )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _parse(name: str, text: str):
    if text == "":
        return None if name not in _STR_FIELDS else ""
    if name in _STR_FIELDS:
        return text
    if name in _BOOL_FIELDS:
        return text == "true"
    if name in _INT_FIELDS:
        return int(text)
    return float(text)


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for rec in sorted(records, key=lambda r: r.key):
            row = rec.to_row()
            w.writerow([_fmt(row[c]) for c in RECORD_COLUMNS])


def load_records(path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [SweepRecord.from_row({k: _parse(k, v) for k, v in row.items()}) for row in rows]


def _load_checkpoint(path: Path) -> dict:
    done = {}
    if not path.exists():
        return done
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = SweepRecord.from_row(json.loads(line))
            done[rec.key] = rec
    return done


def run_sweep(
    spec: SweepSpec,
    workers: int = 1,
    out_dir=None,
    resume: bool = False,
    write_series: bool = False,
) -> list[SweepRecord]:
    """Run every grid point once and return records in canonical order.

    With ``out_dir`` set, each finished point is appended to
    ``checkpoint.jsonl`` and ``records.csv`` / ``manifest.json`` are written at
    the end; ``resume`` reuses successful points from the checkpoint.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    grid = spec.grid()
    out = Path(out_dir) if out_dir is not None else None
    ckpt_fh = None
    done: dict = {}
    series_dir = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        ckpt = out / "checkpoint.jsonl"
        if resume:
            done = {k: r for k, r in _load_checkpoint(ckpt).items() if r.status == "ok"}
        elif ckpt.exists():
            ckpt.unlink()
        ckpt_fh = open(ckpt, "a")
        if write_series:
            series_dir = out / "series"
            series_dir.mkdir(exist_ok=True)
            series_dir = str(series_dir)
    todo = [p for p in grid if p not in done]
    results = dict(done)

    def store(rec: SweepRecord):
        results[rec.key] = rec
        if ckpt_fh is not None:
            ckpt_fh.write(rec.to_json() + "\n")
            ckpt_fh.flush()

    t_start = time.time()
    try:
        if workers == 1 or len(todo) <= 1:
            for p in todo:
                store(_run_point(spec, p, series_dir))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [pool.submit(_run_point, spec, p, series_dir) for p in todo]
                for fut in as_completed(futs):
                    store(fut.result())
    finally:
        if ckpt_fh is not None:
            ckpt_fh.close()
    records = [results[p] for p in grid]
    if out is not None:
        write_records_csv(records, out / "records.csv")
        _write_manifest(out, spec, records, workers, t_start)
    return records


def _write_manifest(out: Path, spec: SweepSpec, records, workers: int, t_start: float) -> None:
    from .manifest import write_manifest

    failures = [{**dict(zip(PARAM_FIELDS, r.params)), "error": r.error} for r in records if r.status != "ok"]
    timings = {"total_wall_time": time.time() - t_start, "workers": workers}
    write_manifest(
        out,
        config=spec.to_dict(),
        extra={"grid_size": len(records), "n_failures": len(failures), "failures": failures, "timings": timings},
    )


def _as_row(rec) -> dict:
    return rec.to_row() if isinstance(rec, SweepRecord) else dict(rec)


def export_heatmap(
    records,
    x_axis: str,
    y_axis: str,
    value_field: str,
    normalization: str = "raw",
    where: dict | None = None,
) -> list[dict]:
    """Long-format ``(x, y, value)`` table over the full x-by-y grid.

    ``where`` filters records by exact parameter values so that each cell is
    unique.  Missing or failed points become cells with ``value=None``.
    ``row_max`` divides each row (fixed ``y``) by its maximum, ``panel_max``
    divides everything by the overall maximum.
    """
    for ax in (x_axis, y_axis):
        if ax not in PARAM_FIELDS:
            raise ValueError(f"unknown axis {ax!r}; choose from {PARAM_FIELDS}")
    if normalization not in ("raw", "row_max", "panel_max"):
        raise ValueError(f"unknown normalization {normalization!r}")
    rows = [_as_row(r) for r in records]
    if where:
        rows = [r for r in rows if all(r.get(k) == v for k, v in where.items())]
    xs = sorted({r[x_axis] for r in rows})
    ys = sorted({r[y_axis] for r in rows})
    cells: dict = {}
    for r in rows:
        key = (r[x_axis], r[y_axis])
        if key in cells:
            raise ValueError(f"several records share cell {key}; narrow them with `where`")
        val = r.get(value_field) if r.get("status", "ok") == "ok" else None
        cells[key] = None if val is None or (isinstance(val, float) and math.isnan(val)) else float(val)

    def scale(vals):
        finite = [v for v in vals if v is not None]
        top = max(finite) if finite else None
        if not top:
            return vals
        return [None if v is None else v / top for v in vals]

    table = {(x, y): cells.get((x, y)) for y in ys for x in xs}
    if normalization == "row_max":
        for y in ys:
            scaled = scale([table[(x, y)] for x in xs])
            for x, v in zip(xs, scaled):
                table[(x, y)] = v
    elif normalization == "panel_max":
        keys = list(table)
        for k, v in zip(keys, scale([table[k] for k in keys])):
            table[k] = v
    return [{"x": x, "y": y, "value": table[(x, y)]} for y in ys for x in xs]


def write_heatmap_csv(rows, path, x_axis: str = "x", y_axis: str = "y", value_field: str = "value") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([x_axis, y_axis, value_field])
        for r in rows:
            w.writerow([_fmt(r["x"]), _fmt(r["y"]), _fmt(r["value"])])
