"""
End-to-end run of one configuration: build operators, propagate, reduce.
"""
from __future__ import annotations

from dataclasses import dataclass

from .dicke_space import make_space
from .liouville import build_liouvillian
from .model import (
    DissipationConfig,
    InitialStateSpec,
    ModelConfig,
    Scenario,
    build_collapse_ops,
    build_drive_operator,
    build_static_hamiltonian,
    initial_state,
)
from .observables import ObservableSeries, ObservableSummary, SeriesObserver, compute_series, summarize
from .propagator import AdaptiveFock, FixedFock, FockOverflow, ResourceError, SimulationConfig, Trajectory, check_fock_convergence, evolve

__all__ = ["RunResult", "run_once", "simulate"]

# RK stages, dense-output coefficients and the working copies all scale with dim**2
_STATE_COPIES = 20


@dataclass
class RunResult:
    space: object
    trajectory: Trajectory
    series: ObservableSeries
    summary: ObservableSummary
    fock_converged: bool
    max_top_fock_pop: float


def run_once(
    space,
    model: ModelConfig,
    dissipation: DissipationConfig,
    initial: InitialStateSpec,
    sim: SimulationConfig,
    top_pop_limit: float | None = None,
):
    """Propagate on a fixed ``space``; the drive is active only in the driven scenario."""
    drive = model.drive if initial.scenario is Scenario.DRIVEN else None
    rho0 = initial_state(space, initial)
    L = build_liouvillian(
        build_static_hamiltonian(space, model), build_drive_operator(space), build_collapse_ops(space, dissipation)
    )
    observer = SeriesObserver(space, model, rho0.matrix)
    traj = evolve(rho0, L, drive, sim, observer=observer, top_pop_limit=top_pop_limit)
    series = compute_series(traj, space, model)
    return traj, series


def simulate(
    n_qubits: int,
    model: ModelConfig,
    dissipation: DissipationConfig,
    initial: InitialStateSpec,
    sim: SimulationConfig,
    space_factory=make_space,
) -> RunResult:
    """Run one configuration under the Fock-cutoff policy of ``sim``.

    With :class:`AdaptiveFock` the cutoff starts at ``max(N, 10)``, raised to
    ``cavity_fock + 1`` when the initial photons would otherwise sit in the top
    level, and doubles until the top Fock level stays below ``population_eps``.
    An attempt is abandoned as soon as a sample crosses the threshold, so only
    the accepted cutoff is integrated to ``t_final``.
    """
    policy = sim.fock_policy
    eps = policy.population_eps if isinstance(policy, AdaptiveFock) else 1e-6
    if isinstance(policy, FixedFock):
        cutoffs = [policy.n_max]
    else:
        start = policy.start or max(n_qubits, 10)
        if initial.scenario is Scenario.UNDRIVEN:
            start = max(start, initial.cavity_fock + 1)
        cutoffs = [start]
    while True:
        n_max = cutoffs[-1]
        space = space_factory(n_qubits, n_max)
        if isinstance(policy, AdaptiveFock):
            need = _STATE_COPIES * 16 * space.total_dim**2
            if need > policy.memory_budget_bytes:
                raise ResourceError(
                    f"fock cutoff {n_max} needs ~{need / 1e9:.2f} GB, budget {policy.memory_budget_bytes / 1e9:.2f} GB"
                )
        if isinstance(policy, FixedFock):
            traj, series = run_once(space, model, dissipation, initial, sim)
            ok, worst = check_fock_convergence(traj, eps)
            break
        try:
            traj, series = run_once(space, model, dissipation, initial, sim, top_pop_limit=eps)
        except FockOverflow:
            cutoffs.append(2 * n_max)
            continue
        ok, worst = check_fock_convergence(traj, eps)
        break
    return RunResult(space, traj, series, summarize(series), ok, worst)
