import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbattery.dicke_space import make_space
from qbattery.liouville import build_liouvillian, dissipator, lindblad_rhs_matrix, rhs, unvec, vec
from qbattery.model import DissipationConfig, Interaction, ModelConfig, build_collapse_ops, build_drive_operator, build_static_hamiltonian


def _generator(n=2, nmax=3, inter=Interaction.DICKE, diss=DissipationConfig(0.1, 0.05, 0.3)):
    space = make_space(n, nmax)
    h = build_static_hamiltonian(space, ModelConfig(g=0.2, interaction=inter))
    return space, h, build_liouvillian(h, build_drive_operator(space), build_collapse_ops(space, diss))


def _random_rho(rng, dim):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def _direct(L, amp, rho):
    h = L.hamiltonian.toarray() + amp * L.drive_op.toarray()
    out = -1j * (h @ rho - rho @ h)
    for c in L.collapse:
        out = out + dissipator(c.toarray(), rho)
    return out


@given(st.integers(0, 2**31 - 1))
def test_vec_convention(seed):
    rng = np.random.default_rng(seed)
    a, x, b = (rng.normal(size=(4, 4)) for _ in range(3))
    assert np.allclose(vec(a @ x @ b), np.kron(b.T, a) @ vec(x))
    assert np.array_equal(unvec(vec(x)), x)


@pytest.mark.parametrize("inter", list(Interaction))
@pytest.mark.parametrize("amp", [0.0, 0.7])
def test_three_evaluations_agree(inter, amp):
    space, _, L = _generator(inter=inter)
    rho = _random_rho(np.random.default_rng(1), space.total_dim)
    ref = _direct(L, amp, rho)
    via_super = unvec(rhs(L, 0.0, amp, vec(rho)), space.total_dim)
    via_matrix = lindblad_rhs_matrix(L, amp, rho)
    assert np.abs(via_super - ref).max() < 1e-12
    assert np.abs(via_matrix - ref).max() < 1e-12


def test_generic_collapse_path():
    # a collapse operator with several entries per row takes the generic branch
    space, h, _ = _generator(n=1, nmax=2)
    from qbattery.dicke_space import Operator, cavity_op, collective_op

    c = Operator(space, (0.2 * (cavity_op(space, "a") + collective_op(space, "Jplus"))).matrix)
    L = build_liouvillian(h, build_drive_operator(space), [c])
    rho = _random_rho(np.random.default_rng(2), space.total_dim)
    assert np.abs(lindblad_rhs_matrix(L, 0.3, rho) - _direct(L, 0.3, rho)).max() < 1e-12


@given(st.integers(0, 2**31 - 1), st.floats(-2, 2))
def test_trace_and_hermiticity_preserved(seed, amp):
    space, _, L = _generator()
    rho = _random_rho(np.random.default_rng(seed), space.total_dim)
    d = unvec(rhs(L, 0.0, amp, vec(rho)), space.total_dim)
    assert abs(np.trace(d)) < 1e-12
    assert np.abs(d - d.conj().T).max() < 1e-12
    m = lindblad_rhs_matrix(L, amp, rho)
    assert abs(np.trace(m)) < 1e-12
    assert np.array_equal(m, m.conj().T)


def test_trace_functional_is_left_null_vector():
    space, _, L = _generator()
    left = vec(np.eye(space.total_dim))
    assert np.abs(left @ L.static_part).max() < 1e-12
    assert np.abs(left @ L.drive_commutator).max() < 1e-12


def test_superoperator_at_matches_split():
    space, _, L = _generator()
    rho = vec(_random_rho(np.random.default_rng(3), space.total_dim))
    assert np.allclose(L.at(0.4) @ rho, rhs(L, 0.0, 0.4, rho))


def test_mismatched_spaces_rejected():
    space, h, _ = _generator()
    other = make_space(3, 3)
    with pytest.raises(ValueError):
        build_liouvillian(h, build_drive_operator(other), [])


def test_gather_collapse_path():
    # one entry per row but no constant offset: a scaled cyclic permutation
    space, h, _ = _generator(n=1, nmax=2)
    from qbattery.dicke_space import Operator

    dim = space.total_dim
    perm = np.roll(np.arange(dim), 2)
    perm[0], perm[1] = perm[1], perm[0]
    c = np.zeros((dim, dim), dtype=complex)
    c[np.arange(dim), perm] = 0.1 * (1 + np.arange(dim))
    L = build_liouvillian(h, build_drive_operator(space), [Operator(space, c)])
    rho = _random_rho(np.random.default_rng(4), dim)
    assert np.abs(lindblad_rhs_matrix(L, 0.2, rho) - _direct(L, 0.2, rho)).max() < 1e-12
