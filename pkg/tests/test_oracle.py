import numpy as np
import pytest

from qbattery.model import DissipationConfig, DriveConfig, InitialStateSpec, Interaction, ModelConfig, Scenario
from qbattery.oracle import FullSpace, compare_engines, dense_evolve, make_full_space, symmetric_projector
from qbattery.propagator import FixedFock, SimulationConfig
from qbattery.simulate import run_once

SHORT = SimulationConfig(t_final=20.0, sample_dt=0.05, fock_policy=FixedFock(5))


def test_full_space_limits():
    assert make_full_space(3, 4).total_dim == 8 * 5
    with pytest.raises(ValueError):
        FullSpace(4, 2)
    with pytest.raises(ValueError):
        dense_evolve(4, ModelConfig(g=0.1), DissipationConfig(), InitialStateSpec(), SHORT)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symmetric_sector_has_maximal_spin(n):
    space = make_full_space(n, 0)
    jz, jp, jm = (space.spin_factor(k).toarray() for k in ("Jz", "Jplus", "Jminus"))
    casimir = 0.5 * (jp @ jm + jm @ jp) + jz @ jz
    p = symmetric_projector(space)
    j = n / 2
    assert np.allclose(p @ casimir @ p, j * (j + 1) * p, atol=1e-12)
    assert np.allclose(jp @ jm - jm @ jp, 2 * jz, atol=1e-12)


def test_projector_is_a_projector():
    space = make_full_space(3, 1)
    p = symmetric_projector(space)
    assert np.allclose(p @ p, p) and np.allclose(p, p.T)
    assert np.trace(p) == pytest.approx(4 * 2)  # (N + 1) symmetric states x 2 Fock levels


@pytest.mark.parametrize("inter", list(Interaction))
@pytest.mark.parametrize("scen", list(Scenario))
def test_single_qubit_engines_coincide(inter, scen):
    cmp = compare_engines(1, inter, scen, DissipationConfig(0.1, 0.05, 0.3), sim=SHORT)
    assert cmp.worst < 1e-10


def test_two_qubit_tc_undriven_weak_dissipation():
    cmp = compare_engines(2, "TavisCummings", "Undriven", DissipationConfig(1e-3, 1e-3, 1e-3))
    assert cmp.max_dev["e_qub"] < 1e-6 and cmp.max_dev["s_c"] < 1e-6
    assert cmp.passed()


def test_two_qubit_dicke_driven():
    cmp = compare_engines(2, "Dicke", "Driven", DissipationConfig(1e-3, 1e-3, 1e-3), sim=SHORT)
    assert cmp.passed()


@pytest.mark.parametrize("scen", list(Scenario))
def test_state_stays_in_symmetric_sector(scen):
    space = make_full_space(3, 5)
    model = ModelConfig(g=0.2, interaction="Dicke", drive=DriveConfig())
    sim = SimulationConfig(t_final=15.0, sample_dt=0.25, fock_policy=FixedFock(5), store_states=True)
    traj, _ = run_once(space, model, DissipationConfig(0.1, 0.05, 0.3), InitialStateSpec(scen, cavity_fock=2), sim)
    outside = np.eye(space.total_dim) - symmetric_projector(space)
    leak = max(abs(np.trace(outside @ rho)) for rho in traj.states)
    assert leak < 1e-10
