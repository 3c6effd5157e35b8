"""
Battery energetics and entanglement observables along a trajectory.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dicke_space import partial_trace, von_neumann_entropy
from .model import ModelConfig, build_static_hamiltonian, qubit_hamiltonian

__all__ = [
    "DegenerateTimingError",
    "ObservableSeries",
    "ObservableSummary",
    "SeriesObserver",
    "compute_series",
    "first_peak_time",
    "summarize",
    "write_series_csv",
]

SERIES_COLUMNS = ("time", "e_qub", "e_total", "s_q", "s_c", "n_phot", "top_fock_pop")
TAU_RTOL = 1e-9


class DegenerateTimingError(ValueError):
    """Maximum energy reached at t = 0 while being positive."""


@dataclass
class ObservableSeries:
    times: np.ndarray
    e_qub: np.ndarray
    e_total: np.ndarray
    s_q: np.ndarray
    s_c: np.ndarray
    n_phot: np.ndarray
    top_fock_pop: np.ndarray

    def columns(self) -> dict[str, np.ndarray]:
        return {"time": self.times, **{k: getattr(self, k) for k in SERIES_COLUMNS[1:]}}


@dataclass(frozen=True)
class ObservableSummary:
    e_max: float
    tau: float
    p_max: float
    s_q_max: float
    s_c_max: float
    s_q_final: float
    s_c_final: float
    flat_energy: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


class SeriesObserver:
    """Per-sample reduction of a joint state to the scalar observables.

    Used directly as the ``observer`` callback of :func:`~qbattery.propagator.evolve`
    so large runs never hold the full state history.
    """

    def __init__(self, space, model: ModelConfig, rho0: np.ndarray):
        self.space = space
        self.offset = model.omega_q * space.n_qubits / 2
        self.hq = np.real(qubit_hamiltonian(space, model).matrix.diagonal())
        h0 = build_static_hamiltonian(space, model).matrix
        # Tr(rho H) = sum(rho.T * H) elementwise; keep H^T dense for this
        self.h0t = h0.T.toarray() if space.total_dim <= 2000 else h0.T.tocsr()
        self.nphot = np.tile(np.arange(space.fock_dim, dtype=float), space.qubit_dim)
        self.e0 = self._expect_h0(np.asarray(rho0))

    def _expect_h0(self, rho: np.ndarray) -> float:
        if isinstance(self.h0t, np.ndarray):
            return float(np.real(np.sum(rho * self.h0t)))
        return float(np.real(self.h0t.multiply(rho).sum()))

    def __call__(self, t: float, rho: np.ndarray) -> tuple:
        diag = np.real(np.diagonal(rho))
        e_qub = float(diag @ self.hq) + self.offset
        e_tot = self._expect_h0(rho) - self.e0
        s_q = von_neumann_entropy(partial_trace(rho, "qubits", self.space))
        s_c = von_neumann_entropy(partial_trace(rho, "cavity", self.space))
        n_ph = float(diag @ self.nphot)
        top = float(diag.reshape(self.space.qubit_dim, self.space.fock_dim)[:, -1].sum())
        return (e_qub, e_tot, s_q, s_c, n_ph, top)


def _series_from_rows(times, rows) -> ObservableSeries:
    arr = np.asarray(rows, dtype=float).reshape(len(times), 6)
    return ObservableSeries(np.asarray(times, dtype=float), *(arr[:, k].copy() for k in range(6)))


def compute_series(traj, space, model: ModelConfig) -> ObservableSeries:
    """Observable time series of a trajectory.

    Thin trajectories (produced with a :class:`SeriesObserver`) are unpacked
    directly; otherwise the stored states are reduced here.
    """
    if traj.observed is not None:
        return _series_from_rows(traj.times, traj.observed)
    if traj.states is None:
        raise ValueError("trajectory holds neither states nor observed values")
    obs = SeriesObserver(space, model, traj.states[0])
    return _series_from_rows(traj.times, [obs(t, rho) for t, rho in zip(traj.times, traj.states)])


def summarize(series: ObservableSeries) -> ObservableSummary:
    """Maximum stored energy, charging time, power and entropy scalars.

    The charging time is the first grid time whose energy is within a relative
    ``1e-9`` of the maximum.
    """
    e = np.asarray(series.e_qub, dtype=float)
    if e.size == 0:
        raise ValueError("empty series")
    t = np.asarray(series.times, dtype=float)
    e_max = float(np.max(e))
    ent = dict(
        s_q_max=float(np.max(series.s_q)),
        s_c_max=float(np.max(series.s_c)),
        s_q_final=float(series.s_q[-1]),
        s_c_final=float(series.s_c[-1]),
    )
    if e_max <= 0.0:
        return ObservableSummary(e_max=0.0, tau=0.0, p_max=0.0, flat_energy=True, **ent)
    idx = int(np.argmax(e >= (1.0 - TAU_RTOL) * e_max))
    tau = float(t[idx])
    if tau == 0.0:
        raise DegenerateTimingError("energy maximum at t=0 with positive e_max")
    return ObservableSummary(e_max=e_max, tau=tau, p_max=e_max / tau, **ent)


def first_peak_time(times, values, refine: bool = False) -> float:
    """Time of the first strict local maximum of ``values``.

    With ``refine`` the vertex of the parabola through the peak sample and its
    neighbours is returned instead of the grid time.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    up = np.diff(v) > 0
    for i in range(1, v.size - 1):
        if up[i - 1] and v[i + 1] < v[i]:
            if not refine:
                return float(t[i])
            y0, y1, y2 = v[i - 1], v[i], v[i + 1]
            h = t[i + 1] - t[i]
            return float(t[i] + 0.5 * h * (y0 - y2) / (y0 - 2 * y1 + y2))
    raise ValueError("no interior local maximum in the series")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        if math.isnan(x) or math.isinf(x):
            return repr(float(x))
        return f"{float(x):.17g}"
    return str(x)


def write_series_csv(series: ObservableSeries, path) -> None:
    cols = series.columns()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_COLUMNS)
        for row in zip(*(cols[c] for c in SERIES_COLUMNS)):
            w.writerow([_fmt(v) for v in row])
