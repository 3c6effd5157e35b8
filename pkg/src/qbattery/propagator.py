"""
Adaptive Runge-Kutta propagation of the master equation with physicality watchdogs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import DOP853, RK45
from scipy.linalg import lapack

from .dicke_space import DensityMatrix
from .liouville import Superoperator, _MatrixGenerator
from .model import DriveConfig, drive_envelope

__all__ = [
    "AdaptiveFock",
    "FixedFock",
    "FockOverflow",
    "PhysicalityError",
    "ResourceError",
    "SimulationConfig",
    "Trajectory",
    "check_fock_convergence",
    "evolve",
]

TRACE_TOL = 1e-8
NEG_TOL = 1e-6
PSD_PROBE = 1e-8

_METHODS = {"RK45": RK45, "DOP853": DOP853}


class PhysicalityError(RuntimeError):
    """The integrated state left the set of density matrices."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


class FockOverflow(RuntimeError):
    """Top Fock level exceeded the requested population limit mid-run."""

    def __init__(self, population: float, time: float):
        super().__init__(f"top Fock level population {population:.3e} at t={time:g}")
        self.population = population
        self.time = time


class ResourceError(MemoryError):
    pass


@dataclass(frozen=True)
class FixedFock:
    n_max: int


@dataclass(frozen=True)
class AdaptiveFock:
    """Start at ``max(N, 10)`` (or ``start``) and double until the top level stays empty."""

    start: int | None = None
    population_eps: float = 1e-6
    memory_budget_bytes: float = 2e9


@dataclass(frozen=True)
class SimulationConfig:
    t_final: float = 50.0
    sample_dt: float = 0.01
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    fock_policy: FixedFock | AdaptiveFock = field(default_factory=AdaptiveFock)
    method: str = "RK45"
    store_states: bool = False

    def __post_init__(self):
        if self.t_final <= 0 or self.sample_dt <= 0:
            raise ValueError("t_final and sample_dt must be positive")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {sorted(_METHODS)}")

    @property
    def times(self) -> np.ndarray:
        n = int(round(self.t_final / self.sample_dt))
        return np.arange(n + 1) * self.sample_dt


@dataclass
class Trajectory:
    """Sampled evolution on a uniform grid.

    ``states`` is only filled when ``store_states`` is set; otherwise the
    per-sample output of the observer lives in ``observed``.
    """

    space: object
    times: np.ndarray
    top_fock_pop: np.ndarray
    trace_error: np.ndarray
    hermiticity_error: np.ndarray
    min_eigenvalue: np.ndarray
    states: list | None = None
    observed: list | None = None
    n_steps: int = 0
    n_rhs: int = 0


def _top_fock_population(space, rho: np.ndarray) -> float:
    d = np.real(np.diagonal(rho)).reshape(space.qubit_dim, space.fock_dim)
    return float(d[:, -1].sum())


def _min_eigenvalue(rho: np.ndarray) -> float:
    """Exact smallest eigenvalue when it might be below ``-PSD_PROBE``, else 0.

    A Cholesky factorization of ``rho + PSD_PROBE`` succeeds exactly when every
    eigenvalue exceeds ``-PSD_PROBE``, and costs a fraction of ``eigvalsh``.
    """
    herm = 0.5 * (rho + rho.conj().T)
    shifted = herm + PSD_PROBE * np.eye(herm.shape[0])
    _, info = lapack.zpotrf(shifted, lower=1, clean=0, overwrite_a=1)
    if info == 0:
        return 0.0
    return float(np.linalg.eigvalsh(herm)[0])


def evolve(
    rho0: DensityMatrix,
    L: Superoperator,
    drive: DriveConfig | None,
    sim: SimulationConfig,
    observer: Callable[[float, np.ndarray], object] | None = None,
    top_pop_limit: float | None = None,
) -> Trajectory:
    """Integrate ``rho0`` under ``L`` on ``[0, sim.t_final]``.

    Every grid sample is checked for trace drift (``> 1e-8``) and negativity
    (``< -1e-6``); either raises :class:`PhysicalityError`.  ``observer`` is
    called as ``observer(t, rho)`` on each sample.  With ``top_pop_limit``
    set, a sample whose top Fock level holds at least that population raises
    :class:`FockOverflow` so an adaptive caller can enlarge the cutoff early.
    """
    space = L.space
    dim = space.total_dim
    if rho0.matrix.shape != (dim, dim):
        raise ValueError("initial state does not live on the generator's space")
    gen = _MatrixGenerator(L)
    n_calls = [0]

    def f(t, y):
        n_calls[0] += 1
        rho = y.reshape(dim, dim)
        return gen(float(drive_envelope(t, drive)), rho).ravel()

    times = sim.times
    n = len(times)
    top = np.empty(n)
    tr_err = np.empty(n)
    herm_err = np.empty(n)
    min_eig = np.empty(n)
    states = [] if sim.store_states else None
    observed = [] if observer is not None else None

    def record(i, t, rho):
        tr_err[i] = abs(np.trace(rho) - 1.0)
        herm_err[i] = float(np.max(np.abs(rho - rho.conj().T)))
        min_eig[i] = _min_eigenvalue(rho)
        top[i] = _top_fock_population(space, rho)
        if tr_err[i] > TRACE_TOL:
            raise PhysicalityError(f"trace drift {tr_err[i]:.3e}", t)
        if min_eig[i] < -NEG_TOL:
            raise PhysicalityError(f"negative eigenvalue {min_eig[i]:.3e}", t)
        if top_pop_limit is not None and top[i] >= top_pop_limit:
            raise FockOverflow(top[i], t)
        if states is not None:
            states.append(rho.copy())
        if observed is not None:
            observed.append(observer(t, rho))

    y0 = np.ascontiguousarray(rho0.matrix, dtype=complex).ravel()
    record(0, 0.0, y0.reshape(dim, dim))
    solver = _METHODS[sim.method](
        f, 0.0, y0, sim.t_final, rtol=sim.rel_tol, atol=sim.abs_tol, first_step=min(sim.sample_dt, 1e-3)
    )
    nxt = 1
    n_steps = 0
    while nxt < n:
        msg = solver.step()
        n_steps += 1
        if solver.status == "failed":
            raise PhysicalityError(f"integrator failed: {msg}", solver.t)
        stop = nxt
        while stop < n and times[stop] <= solver.t:
            stop += 1
        if stop > nxt:
            interp = solver.dense_output()
            for i in range(nxt, stop):
                y = solver.y if times[i] == solver.t else interp(times[i])
                record(i, times[i], y.reshape(dim, dim))
            nxt = stop
        if solver.status == "finished" and nxt < n:
            # the last grid point can sit a rounding error past t_final
            for i in range(nxt, n):
                record(i, times[i], solver.y.reshape(dim, dim))
            nxt = n
    return Trajectory(
        space=space,
        times=times,
        top_fock_pop=top,
        trace_error=tr_err,
        hermiticity_error=herm_err,
        min_eigenvalue=min_eig,
        states=states,
        observed=observed,
        n_steps=n_steps,
        n_rhs=n_calls[0],
    )


def check_fock_convergence(traj: Trajectory, eps: float = 1e-6) -> tuple[bool, float]:
    """``(converged, max top-level population)`` for a trajectory."""
    worst = float(np.max(traj.top_fock_pop))
    return worst < eps, worst
