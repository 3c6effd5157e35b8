"""
Brute-force reference engine on the full ``2**N`` qubit space.

Collective operators are built as explicit sums of single-qubit Pauli
operators, so nothing here relies on the Dicke-basis reduction.  Everything
downstream of operator construction (propagation, observables) is shared
with the reduced engine.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .model import DissipationConfig, DriveConfig, InitialStateSpec, Interaction, ModelConfig, Scenario
from .observables import ObservableSeries
from .propagator import FixedFock, SimulationConfig
from .simulate import simulate

__all__ = ["ORACLE_DISSIPATION", "FullSpace", "OracleComparison", "compare_engines", "dense_evolve", "make_full_space", "symmetric_projector"]

MAX_QUBITS = 3

# single-qubit basis: index 0 = |g>, index 1 = |e>
_SIGMA = {
    "plus": np.array([[0, 0], [1, 0]], dtype=complex),
    "minus": np.array([[0, 1], [0, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
}


def _local(op: np.ndarray, j: int, n: int) -> sp.csr_matrix:
    mats = [np.eye(2)] * n
    mats[j] = op
    out = sp.csr_matrix(np.ones((1, 1)))
    for m in mats:
        out = sp.kron(out, sp.csr_matrix(m), format="csr")
    return out


@dataclass(frozen=True)
class FullSpace:
    """``N`` distinguishable qubits tensored with Fock levels ``0 .. fock_cutoff``."""

    n_qubits: int
    fock_cutoff: int

    def __post_init__(self):
        if self.n_qubits not in range(1, MAX_QUBITS + 1):
            raise ValueError(f"the dense oracle is limited to 1..{MAX_QUBITS} qubits, got {self.n_qubits}")

    @property
    def j(self) -> float:
        return self.n_qubits / 2

    @property
    def qubit_dim(self) -> int:
        return 2**self.n_qubits

    @property
    def fock_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def total_dim(self) -> int:
        return self.qubit_dim * self.fock_dim

    @property
    def ground_index(self) -> int:
        return 0

    def spin_factor(self, kind: str) -> sp.csr_matrix:
        """Sum over qubits of the single-qubit ladder or ``sigma_z / 2`` operator."""
        key, scale = {"Jz": ("z", 0.5), "Jplus": ("plus", 1.0), "Jminus": ("minus", 1.0)}[kind]
        total = sum(_local(_SIGMA[key], j, self.n_qubits) for j in range(self.n_qubits))
        return (scale * total).tocsr().astype(complex)


def make_full_space(n_qubits: int, fock_cutoff: int) -> FullSpace:
    return FullSpace(int(n_qubits), int(fock_cutoff))


def symmetric_projector(space: FullSpace) -> np.ndarray:
    """Projector onto the permutation-symmetric qubit sector, tensored with the cavity identity."""
    n = space.n_qubits
    dq = space.qubit_dim
    perms = list(itertools.permutations(range(n)))
    proj = np.zeros((dq, dq))
    eye = np.eye(dq).reshape((dq,) + (2,) * n)
    for p in perms:
        proj += eye.transpose((0,) + tuple(1 + q for q in p)).reshape(dq, dq)
    proj /= len(perms)
    return np.kron(proj, np.eye(space.fock_dim))


def dense_evolve(
    n_qubits: int,
    model: ModelConfig,
    dissipation: DissipationConfig,
    initial: InitialStateSpec,
    sim: SimulationConfig,
) -> ObservableSeries:
    """Observable series from the full-space engine; refuses ``N > 3``."""
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"the dense oracle refuses N={n_qubits} > {MAX_QUBITS}")
    return simulate(n_qubits, model, dissipation, initial, sim, space_factory=make_full_space).series


@dataclass
class OracleComparison:
    n_qubits: int
    interaction: str
    scenario: str
    dissipation: DissipationConfig
    max_dev: dict = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.max_dev.values())

    def passed(self, tol: float = 1e-6) -> bool:
        return self.worst < tol


ORACLE_DISSIPATION = (
    DissipationConfig(0.0, 0.0, 0.0),
    DissipationConfig(1e-3, 1e-3, 1e-3),
    DissipationConfig(0.1, 0.05, 0.3),
)


def compare_engines(
    n_qubits: int,
    interaction: Interaction | str,
    scenario: Scenario | str,
    dissipation: DissipationConfig,
    g: float = 0.1,
    fock_cutoff: int = 6,
    sim: SimulationConfig | None = None,
) -> OracleComparison:
    """Run both engines on one configuration and report max absolute deviations per series."""
    scenario = Scenario(scenario)
    model = ModelConfig(g=g, interaction=interaction, drive=DriveConfig())
    init = InitialStateSpec(scenario, cavity_fock=n_qubits if scenario is Scenario.UNDRIVEN else 0)
    sim = sim or SimulationConfig(fock_policy=FixedFock(fock_cutoff))
    reduced = simulate(n_qubits, model, dissipation, init, sim).series
    full = dense_evolve(n_qubits, model, dissipation, init, sim)
    devs = {
        name: float(np.max(np.abs(getattr(reduced, name) - getattr(full, name))))
        for name in ("e_qub", "e_total", "s_q", "s_c", "n_phot", "top_fock_pop")
    }
    return OracleComparison(n_qubits, model.interaction.value, scenario.value, dissipation, devs)
