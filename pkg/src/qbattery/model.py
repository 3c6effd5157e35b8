"""
Hamiltonians, drive envelope, collapse operators and initial states for the
cavity-coupled qubit battery.

Units: hbar = 1, frequencies and rates in units of the qubit frequency.
The qubit energy is ``omega_q * Jz`` (spectrum ``-N/2 .. N/2``), so a fully
charged battery stores ``N * omega_q`` above the ground state.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dicke_space import DensityMatrix, Operator, cavity_op, collective_op

__all__ = [
    "DissipationConfig",
    "DriveConfig",
    "InitialStateSpec",
    "Interaction",
    "ModelConfig",
    "Scenario",
    "build_collapse_ops",
    "build_drive_operator",
    "build_static_hamiltonian",
    "drive_envelope",
    "excitation_number_operator",
    "initial_state",
    "qubit_hamiltonian",
]


class Interaction(str, enum.Enum):
    DICKE = "Dicke"
    TAVIS_CUMMINGS = "TavisCummings"


class Scenario(str, enum.Enum):
    UNDRIVEN = "Undriven"
    DRIVEN = "Driven"


@dataclass(frozen=True)
class DriveConfig:
    """Gaussian envelope ``eta0 * exp(-(t - t0)**2 / (2 sigma**2))``."""

    eta0: float = 1.0
    sigma: float = 2.0
    t0: float = 5.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.eta0, self.sigma, self.t0)):
            raise ValueError("drive parameters must be finite")
        if self.eta0 < 0:
            raise ValueError(f"eta0 must be >= 0, got {self.eta0}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class ModelConfig:
    g: float
    interaction: Interaction = Interaction.TAVIS_CUMMINGS
    omega_q: float = 1.0
    omega_c: float = 1.0
    drive: DriveConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "interaction", Interaction(self.interaction))
        if not all(math.isfinite(v) for v in (self.g, self.omega_q, self.omega_c)):
            raise ValueError("g, omega_q and omega_c must be finite")
        if self.omega_q <= 0 or self.omega_c <= 0:
            raise ValueError("omega_q and omega_c must be positive")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")

    @property
    def detuning(self) -> float:
        return self.omega_q - self.omega_c


@dataclass(frozen=True)
class DissipationConfig:
    kappa: float = 0.0
    gamma_minus: float = 0.0
    gamma_z: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "gamma_minus", "gamma_z"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {val}")


@dataclass(frozen=True)
class InitialStateSpec:
    scenario: Scenario = Scenario.DRIVEN
    cavity_fock: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.cavity_fock < 0:
            raise ValueError("cavity_fock must be >= 0")


def drive_envelope(t, d: DriveConfig | None):
    """Drive amplitude at time(s) ``t``; zero when there is no drive."""
    if d is None:
        return np.zeros_like(t, dtype=float) if np.ndim(t) else 0.0
    return d.eta0 * np.exp(-((t - d.t0) ** 2) / (2.0 * d.sigma**2))


def qubit_hamiltonian(space, m: ModelConfig) -> Operator:
    return m.omega_q * collective_op(space, "Jz")


def build_static_hamiltonian(space, m: ModelConfig) -> Operator:
    """Time-independent part: cavity + qubits + light-matter coupling.

    Tavis-Cummings keeps ``g (a^dag J- + a J+)``; Dicke adds the
    counter-rotating ``g (a^dag J+ + a J-)``.
    """
    a, ad = cavity_op(space, "a"), cavity_op(space, "adag")
    jp, jm = collective_op(space, "Jplus"), collective_op(space, "Jminus")
    h = m.omega_c * cavity_op(space, "number") + qubit_hamiltonian(space, m)
    if m.g:
        coupling = ad @ jm + a @ jp
        if m.interaction is Interaction.DICKE:
            coupling = coupling + ad @ jp + a @ jm
        h = h + m.g * coupling
    return Operator(space, h.matrix, hermitian=True)


def build_drive_operator(space) -> Operator:
    """``a^dag + a``; the envelope multiplies it at propagation time."""
    x = cavity_op(space, "a") + cavity_op(space, "adag")
    return Operator(space, x.matrix, hermitian=True)


def excitation_number_operator(space) -> Operator:
    """``a^dag a + Jz + J``, conserved by the Tavis-Cummings coupling."""
    shift = Operator(space, space.n_qubits / 2 * sp.identity(space.total_dim), hermitian=True)
    return cavity_op(space, "number") + collective_op(space, "Jz") + shift


def build_collapse_ops(space, d: DissipationConfig) -> list[Operator]:
    """Collective collapse operators ``sqrt(kappa) a``, ``sqrt(g-) J-``, ``sqrt(gz) Jz``.

    Channels with a zero rate are dropped.
    """
    ops = []
    if d.kappa > 0:
        ops.append(math.sqrt(d.kappa) * cavity_op(space, "a"))
    if d.gamma_minus > 0:
        ops.append(math.sqrt(d.gamma_minus) * collective_op(space, "Jminus"))
    if d.gamma_z > 0:
        ops.append(math.sqrt(d.gamma_z) * collective_op(space, "Jz"))
    return ops


def initial_state(space, spec: InitialStateSpec) -> DensityMatrix:
    """All qubits in the ground state; cavity in ``|n>`` (undriven) or vacuum (driven)."""
    n = spec.cavity_fock if spec.scenario is Scenario.UNDRIVEN else 0
    if n > space.fock_cutoff:
        raise ValueError(f"cavity_fock={n} exceeds fock_cutoff={space.fock_cutoff}")
    rho = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    idx = space.ground_index * space.fock_dim + n
    rho[idx, idx] = 1.0
    return DensityMatrix(space, rho)
