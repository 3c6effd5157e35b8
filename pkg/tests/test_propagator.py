import numpy as np
import pytest

from qbattery.dicke_space import DensityMatrix, collective_op, make_space
from qbattery.liouville import build_liouvillian
from qbattery.model import (
    DissipationConfig,
    DriveConfig,
    InitialStateSpec,
    Interaction,
    ModelConfig,
    Scenario,
    build_collapse_ops,
    build_drive_operator,
    build_static_hamiltonian,
    initial_state,
)
from qbattery.propagator import (
    AdaptiveFock,
    FixedFock,
    FockOverflow,
    PhysicalityError,
    ResourceError,
    SimulationConfig,
    _min_eigenvalue,
    check_fock_convergence,
    evolve,
)
from qbattery.simulate import simulate


def _setup(n, nmax, model, diss=DissipationConfig(), scen=Scenario.UNDRIVEN, fock=0):
    space = make_space(n, nmax)
    L = build_liouvillian(
        build_static_hamiltonian(space, model), build_drive_operator(space), build_collapse_ops(space, diss)
    )
    return space, L, initial_state(space, InitialStateSpec(scen, cavity_fock=fock))


def test_stationary_state_stays_put():
    space, L, rho0 = _setup(3, 4, ModelConfig(g=0.1))
    traj = evolve(rho0, L, None, SimulationConfig(t_final=5.0, store_states=True))
    assert max(np.abs(s - rho0.matrix).max() for s in traj.states) < 1e-12
    assert traj.n_rhs > 0


def test_jaynes_cummings_vacuum_rabi():
    g = 0.1
    space, L, rho0 = _setup(1, 3, ModelConfig(g=g), fock=1)
    traj = evolve(rho0, L, None, SimulationConfig(t_final=40.0, sample_dt=0.05, store_states=True))
    jz = np.real(collective_op(space, "Jz").matrix.diagonal())
    p_exc = np.array([np.real(np.diagonal(s)) @ jz for s in traj.states]) + 0.5
    assert np.abs(p_exc - np.sin(g * traj.times) ** 2).max() < 1e-6


def test_cavity_decay_at_inverse_rate():
    kappa = 0.25
    space, L, rho0 = _setup(1, 4, ModelConfig(g=0.0), DissipationConfig(kappa=kappa), fock=3)
    traj = evolve(rho0, L, None, SimulationConfig(t_final=1 / kappa, sample_dt=0.02, store_states=True))
    nphot = np.tile(np.arange(space.fock_dim), space.qubit_dim)
    n_t = np.array([np.real(np.diagonal(s)) @ nphot for s in traj.states])
    assert n_t[-1] == pytest.approx(3 * np.exp(-1.0), rel=1e-7)
    assert np.abs(n_t - 3 * np.exp(-kappa * traj.times)).max() < 1e-7


def test_qubit_relaxation_rate():
    # single excitation under sqrt(g-) J-: P_e(t) = exp(-g- t)
    gm = 0.2
    space = make_space(1, 1)
    rho = np.zeros((4, 4), dtype=complex)
    rho[2, 2] = 1.0  # |e, 0>
    L = build_liouvillian(
        build_static_hamiltonian(space, ModelConfig(g=0.0)),
        build_drive_operator(space),
        build_collapse_ops(space, DissipationConfig(gamma_minus=gm)),
    )
    traj = evolve(DensityMatrix(space, rho), L, None, SimulationConfig(t_final=5.0, store_states=True))
    pe = np.array([np.real(s[2, 2] + s[3, 3]) for s in traj.states])
    assert np.abs(pe - np.exp(-gm * traj.times)).max() < 1e-7


@pytest.mark.parametrize("inter", list(Interaction))
def test_closed_evolution_stays_pure(inter):
    space, L, rho0 = _setup(2, 8, ModelConfig(g=0.2, interaction=inter, drive=DriveConfig()), scen=Scenario.DRIVEN)
    traj = evolve(rho0, L, DriveConfig(eta0=0.3), SimulationConfig(t_final=12.0, sample_dt=0.1, store_states=True))
    purity = np.array([np.real(np.trace(s @ s)) for s in traj.states])
    assert np.abs(purity - 1).max() < 1e-7
    assert traj.trace_error.max() < 1e-10
    assert traj.hermiticity_error.max() < 1e-10


def test_sample_grid_and_diagnostics_shape():
    sim = SimulationConfig(t_final=2.0, sample_dt=0.25)
    assert np.allclose(sim.times, np.arange(9) * 0.25)
    space, L, rho0 = _setup(2, 3, ModelConfig(g=0.1), DissipationConfig(0.01, 0.01, 0.01), fock=1)
    traj = evolve(rho0, L, None, sim)
    for arr in (traj.top_fock_pop, traj.trace_error, traj.hermiticity_error, traj.min_eigenvalue):
        assert arr.shape == (9,)
    assert traj.states is None and traj.observed is None


def test_min_eigenvalue_probe():
    assert _min_eigenvalue(np.diag([0.5, 0.5, 0.0])) == 0.0
    assert _min_eigenvalue(np.diag([1.0, -1e-9, 1e-9])) == 0.0
    assert _min_eigenvalue(np.diag([1.001, -1e-3])) == pytest.approx(-1e-3)


def test_unphysical_initial_state_raises():
    space, L, _ = _setup(1, 1, ModelConfig(g=0.1))
    bad = np.diag([1.01, -0.01, 0, 0]).astype(complex)
    with pytest.raises(PhysicalityError) as info:
        evolve(DensityMatrix(space, bad), L, None, SimulationConfig(t_final=1.0))
    assert info.value.time == 0.0
    with pytest.raises(PhysicalityError):
        evolve(DensityMatrix(space, np.diag([0.5, 0, 0, 0]).astype(complex)), L, None, SimulationConfig(t_final=1.0))


def test_simulation_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(t_final=-1.0)
    with pytest.raises(ValueError):
        SimulationConfig(method="Euler")
    with pytest.raises(ValueError):
        SimulationConfig(rel_tol=0.0)


def test_fock_convergence_flag():
    model = ModelConfig(g=0.1, drive=DriveConfig())
    init = InitialStateSpec(Scenario.DRIVEN)
    sim = SimulationConfig(t_final=15.0, sample_dt=0.1, fock_policy=FixedFock(2))
    res = simulate(2, model, DissipationConfig(), init, sim)
    ok, worst = check_fock_convergence(res.trajectory)
    assert not ok and worst > 1e-6 and not res.fock_converged


def test_adaptive_policy_reaches_converged_cutoff():
    model = ModelConfig(g=0.1, drive=DriveConfig())
    init = InitialStateSpec(Scenario.DRIVEN)
    sim = SimulationConfig(t_final=15.0, sample_dt=0.1, fock_policy=AdaptiveFock(start=3))
    res = simulate(2, model, DissipationConfig(1e-3, 1e-3, 1e-3), init, sim)
    assert res.fock_converged and res.max_top_fock_pop < 1e-6
    assert res.space.fock_cutoff in (3, 6, 12, 24)


def test_adaptive_result_matches_fixed_run_at_final_cutoff():
    # abandoned attempts leave no trace: the accepted run is a full fixed-cutoff run
    model = ModelConfig(g=0.1, drive=DriveConfig())
    init = InitialStateSpec(Scenario.DRIVEN)
    diss = DissipationConfig(1e-3, 1e-3, 1e-3)
    ada = simulate(2, model, diss, init, SimulationConfig(t_final=15.0, sample_dt=0.1, fock_policy=AdaptiveFock(start=3)))
    fix = simulate(
        2, model, diss, init, SimulationConfig(t_final=15.0, sample_dt=0.1, fock_policy=FixedFock(ada.space.fock_cutoff))
    )
    assert ada.space.fock_cutoff > 3
    assert ada.summary == fix.summary
    np.testing.assert_array_equal(ada.series.e_qub, fix.series.e_qub)


def test_top_pop_limit_aborts_early():
    model = ModelConfig(g=0.1, drive=DriveConfig())
    space, L, rho0 = _setup(2, 2, model, DissipationConfig(), Scenario.DRIVEN)
    with pytest.raises(FockOverflow) as err:
        evolve(rho0, L, model.drive, SimulationConfig(t_final=15.0), top_pop_limit=1e-6)
    assert 0.0 < err.value.time < 15.0 and err.value.population >= 1e-6


def test_adaptive_memory_budget():
    sim = SimulationConfig(t_final=1.0, fock_policy=AdaptiveFock(start=50, memory_budget_bytes=1e6))
    with pytest.raises(ResourceError):
        simulate(10, ModelConfig(g=0.1), DissipationConfig(), InitialStateSpec(Scenario.DRIVEN), sim)


def test_cutoff_independence_when_converged():
    # excitation number 2 is conserved, so any cutoff >= 2 gives identical physics
    model = ModelConfig(g=0.15)
    init = InitialStateSpec(Scenario.UNDRIVEN, cavity_fock=2)
    runs = [
        simulate(3, model, DissipationConfig(), init, SimulationConfig(t_final=20.0, sample_dt=0.1, fock_policy=FixedFock(k)))
        for k in (3, 7)
    ]
    a, b = (r.series for r in runs)
    # residual differences come from the adaptive step sequence, not the cutoff
    for name in ("e_qub", "e_total", "s_q", "s_c", "n_phot"):
        assert np.abs(getattr(a, name) - getattr(b, name)).max() < 1e-6


def test_fock_convergence_examples():
    sim = SimulationConfig(t_final=50.0, fock_policy=FixedFock(7))
    res = simulate(2, ModelConfig(g=0.1), DissipationConfig(1e-3, 1e-3, 1e-3), InitialStateSpec(Scenario.UNDRIVEN, cavity_fock=2), sim)
    assert check_fock_convergence(res.trajectory)[0]
    # doubling the cutoff confirms the converged answer
    sim2 = SimulationConfig(t_final=50.0, fock_policy=FixedFock(14))
    res2 = simulate(2, ModelConfig(g=0.1), DissipationConfig(1e-3, 1e-3, 1e-3), InitialStateSpec(Scenario.UNDRIVEN, cavity_fock=2), sim2)
    for key in ("e_max", "tau", "s_q_max"):
        a, b = getattr(res.summary, key), getattr(res2.summary, key)
        assert abs(a - b) <= 1e-5 * abs(b)
    driven = simulate(
        1, ModelConfig(g=0.1, drive=DriveConfig()), DissipationConfig(), InitialStateSpec(Scenario.DRIVEN),
        SimulationConfig(t_final=10.0, sample_dt=0.1, fock_policy=FixedFock(1)),
    )
    assert not check_fock_convergence(driven.trajectory)[0]
    assert check_fock_convergence(driven.trajectory, eps=1.0)[0]


def test_tolerance_independence():
    model = ModelConfig(g=0.1, interaction="Dicke", drive=DriveConfig())
    init = InitialStateSpec(Scenario.DRIVEN)
    diss = DissipationConfig(1e-3, 1e-2, 0.1)
    runs = [
        simulate(3, model, diss, init, SimulationConfig(t_final=20.0, sample_dt=0.05, rel_tol=rt, abs_tol=rt / 100, fock_policy=FixedFock(12)))
        for rt in (1e-8, 5e-9)
    ]
    a, b = (r.series for r in runs)
    # no global error estimate is reported; bound by 10x the local tolerance accumulated over t_final
    for name in ("e_qub", "e_total", "n_phot"):
        scale = max(1.0, np.abs(getattr(b, name)).max())
        assert np.abs(getattr(a, name) - getattr(b, name)).max() < 10 * 1e-8 * 20.0 * scale


def test_dephasing_only_purity_is_monotone():
    # a Hermitian collapse operator makes the dissipator unital, so Tr(rho^2) cannot grow
    space, L, rho0 = _setup(3, 4, ModelConfig(g=0.2), DissipationConfig(gamma_z=0.05), fock=2)
    traj = evolve(rho0, L, None, SimulationConfig(t_final=30.0, sample_dt=0.1, store_states=True))
    purity = np.array([np.real(np.trace(s @ s)) for s in traj.states])
    assert np.all(np.diff(purity) <= 1e-9)
    assert purity[-1] < 0.99


def test_purity_never_exceeds_initial_maximum():
    space, L, rho0 = _setup(2, 6, ModelConfig(g=0.2, interaction="Dicke"), DissipationConfig(0.05, 0.05, 0.05), fock=2)
    traj = evolve(rho0, L, None, SimulationConfig(t_final=30.0, sample_dt=0.1, store_states=True))
    purity = np.array([np.real(np.trace(s @ s)) for s in traj.states])
    assert np.maximum.accumulate(purity).max() <= purity[0] + 1e-7
