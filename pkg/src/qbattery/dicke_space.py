"""
Symmetric (Dicke) qubit manifold tensored with a truncated cavity mode.

Basis ordering is ``qubit (x) cavity``: the joint index of ``|J, m> (x) |n>`` is
``k * (fock_cutoff + 1) + n`` with ``k = m + J`` running over ``0 .. N``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

__all__ = [
    "CorruptedStateError",
    "DensityMatrix",
    "HilbertSpace",
    "Operator",
    "cavity_op",
    "collective_op",
    "make_space",
    "partial_trace",
    "von_neumann_entropy",
]

CORRUPT_TOL = 1e-6


class CorruptedStateError(ValueError):
    """Raised when a reduced state has a clearly negative eigenvalue."""


@dataclass(frozen=True)
class HilbertSpace:
    """Dicke manifold ``J = N/2`` tensored with Fock levels ``0 .. fock_cutoff``."""

    n_qubits: int
    fock_cutoff: int

    @property
    def j(self) -> float:
        return self.n_qubits / 2

    @property
    def dicke_dim(self) -> int:
        return self.n_qubits + 1

    @property
    def qubit_dim(self) -> int:
        return self.dicke_dim

    @property
    def fock_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def total_dim(self) -> int:
        return self.qubit_dim * self.fock_dim

    def spin_factor(self, kind: str) -> sp.csr_matrix:
        """Collective spin operator on the qubit factor alone."""
        m = np.arange(self.dicke_dim) - self.j
        if kind == "Jz":
            return sp.diags(m).tocsr().astype(complex)
        # <J, m+1| J+ |J, m> sits on the first subdiagonal (index k -> k+1)
        coef = np.sqrt(self.j * (self.j + 1) - m[:-1] * (m[:-1] + 1))
        jp = sp.diags(coef, offsets=-1, shape=(self.dicke_dim,) * 2)
        if kind == "Jplus":
            return jp.tocsr().astype(complex)
        if kind == "Jminus":
            return jp.T.tocsr().astype(complex)
        raise ValueError(f"unknown collective operator {kind!r}")

    @property
    def ground_index(self) -> int:
        """Qubit-factor index of the all-ground state ``|J, -J>``."""
        return 0


def make_space(n_qubits: int, fock_cutoff: int) -> HilbertSpace:
    if int(n_qubits) != n_qubits or n_qubits < 1:
        raise ValueError(f"n_qubits must be a positive integer, got {n_qubits!r}")
    if int(fock_cutoff) != fock_cutoff or fock_cutoff < 1:
        raise ValueError(f"fock_cutoff must be a positive integer, got {fock_cutoff!r}")
    return HilbertSpace(int(n_qubits), int(fock_cutoff))


@dataclass(frozen=True, eq=False)
class Operator:
    """Sparse operator on the joint space of ``space``."""

    space: object
    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        mat = sp.csr_matrix(self.matrix, dtype=complex)
        n = self.space.total_dim
        if mat.shape != (n, n):
            raise ValueError(f"operator shape {mat.shape} does not match space dimension {n}")
        mat.sort_indices()
        object.__setattr__(self, "matrix", mat)

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T.tocsr(), self.hermitian)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def _check(self, other: "Operator"):
        if other.space != self.space:
            raise ValueError("operators live on different spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix, self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix, self.hermitian and other.hermitian)

    def __mul__(self, scalar) -> "Operator":
        herm = self.hermitian and np.isreal(scalar)
        return Operator(self.space, self.matrix * scalar, bool(herm))

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)


def collective_op(space, kind: Literal["Jz", "Jplus", "Jminus"]) -> Operator:
    """Collective spin operator embedded as ``S (x) 1_cavity``."""
    mat = sp.kron(space.spin_factor(kind), sp.identity(space.fock_dim), format="csr")
    return Operator(space, mat, hermitian=(kind == "Jz"))


def _fock_factor(fock_dim: int, kind: str) -> sp.csr_matrix:
    n = np.arange(fock_dim)
    if kind == "number":
        return sp.diags(n.astype(float)).tocsr()
    a = sp.diags(np.sqrt(n[1:]), offsets=1, shape=(fock_dim, fock_dim))
    if kind == "a":
        return a.tocsr()
    if kind == "adag":
        return a.T.tocsr()
    raise ValueError(f"unknown cavity operator {kind!r}")


def cavity_op(space, kind: Literal["a", "adag", "number"]) -> Operator:
    """Truncated bosonic operator embedded as ``1_qubits (x) B``."""
    mat = sp.kron(sp.identity(space.qubit_dim), _fock_factor(space.fock_dim, kind), format="csr")
    return Operator(space, mat, hermitian=(kind == "number"))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense density matrix on ``space`` (or on one of its factors after a partial trace)."""

    space: object
    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def trace_error(self) -> float:
        return float(abs(np.trace(self.matrix) - 1.0))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-8, eig_tol: float = 1e-8):
        """Raise ``ValueError`` if the matrix is not a physical state."""
        if self.hermiticity_error() > herm_tol:
            raise ValueError(f"density matrix not Hermitian (error {self.hermiticity_error():.3e})")
        if self.trace_error() > trace_tol:
            raise ValueError(f"density matrix trace off by {self.trace_error():.3e}")
        lam = self.min_eigenvalue()
        if lam < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.3e}")
        return self


def partial_trace(rho: DensityMatrix | np.ndarray, keep: Literal["qubits", "cavity"], space=None) -> DensityMatrix:
    """Reduce a joint state to the qubit or cavity factor.

    ``rho`` may be a :class:`DensityMatrix` or a bare array, in which case
    ``space`` must be given.
    """
    if isinstance(rho, DensityMatrix):
        space, mat = rho.space, rho.matrix
    else:
        mat = np.asarray(rho)
    dq, df = space.qubit_dim, space.fock_dim
    r = mat.reshape(dq, df, dq, df)
    if keep == "qubits":
        red = np.einsum("ajbj->ab", r)
    elif keep == "cavity":
        red = np.einsum("iaib->ab", r)
    else:
        raise ValueError(f"keep must be 'qubits' or 'cavity', got {keep!r}")
    return DensityMatrix(space, red)


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """Entropy ``-Tr rho ln rho`` in nats.

    Round-off negatives down to ``-1e-6`` are clamped to zero; anything
    below that raises :class:`CorruptedStateError`.
    """
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    lam = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    if lam[0] < -CORRUPT_TOL:
        raise CorruptedStateError(f"eigenvalue {lam[0]:.3e} below -{CORRUPT_TOL:g}")
    lam = lam[lam > 0.0]
    return float(max(-np.sum(lam * np.log(lam)), 0.0))
