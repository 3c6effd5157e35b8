"""
Vectorized Lindblad generator.

Column-stacking convention: ``vec(A @ X @ B) = (B.T kron A) @ vec(X)`` with
``vec(X) = X.ravel(order="F")``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dicke_space import Operator

__all__ = ["Superoperator", "build_liouvillian", "dissipator", "lindblad_rhs_matrix", "rhs", "unvec", "vec"]


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).ravel(order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape((dim, dim), order="F")


def _spre(a: sp.spmatrix) -> sp.csr_matrix:
    return sp.kron(sp.identity(a.shape[0], format="csr"), a, format="csr")


def _spost(b: sp.spmatrix) -> sp.csr_matrix:
    return sp.kron(b.T, sp.identity(b.shape[0], format="csr"), format="csr")


def _commutator_super(h: sp.spmatrix) -> sp.csr_matrix:
    """Superoperator of ``X -> -i [h, X]``."""
    return (-1j * (_spre(h) - _spost(h))).tocsr()


def _dissipator_super(c: sp.spmatrix) -> sp.csr_matrix:
    cdc = (c.conj().T @ c).tocsr()
    jump = sp.kron(c.conj(), c, format="csr")
    return (jump - 0.5 * (_spre(cdc) + _spost(cdc))).tocsr()


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Lindblad generator split into a static part and a drive commutator.

    The full generator at time ``t`` is ``static_part + eta(t) * drive_commutator``.
    The sparse operators are kept alongside so the same generator can be
    evaluated without vectorization (see :func:`lindblad_rhs_matrix`).
    """

    space: object
    static_part: sp.csr_matrix = field(repr=False)
    drive_commutator: sp.csr_matrix = field(repr=False)
    hamiltonian: sp.csr_matrix = field(repr=False)
    drive_op: sp.csr_matrix = field(repr=False)
    collapse: tuple = field(repr=False)

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def at(self, drive_amp: float) -> sp.csr_matrix:
        return (self.static_part + drive_amp * self.drive_commutator).tocsr()


def build_liouvillian(h0: Operator, drive_op: Operator, collapse) -> Superoperator:
    space = h0.space
    for op in [drive_op, *collapse]:
        if op.space != space or op.matrix.shape != h0.matrix.shape:
            raise ValueError("all operators must act on the same space")
    h = h0.matrix
    static = _commutator_super(h)
    for c in collapse:
        static = static + _dissipator_super(c.matrix)
    static = static.tocsr()
    static.sum_duplicates()
    static.sort_indices()
    drive = _commutator_super(drive_op.matrix)
    drive.sort_indices()
    return Superoperator(
        space=space,
        static_part=static,
        drive_commutator=drive,
        hamiltonian=h,
        drive_op=drive_op.matrix,
        collapse=tuple(c.matrix for c in collapse),
    )


def rhs(L: Superoperator, t: float, drive_amp: float, rho_vec: np.ndarray) -> np.ndarray:
    """``d vec(rho)/dt`` at time ``t`` for drive amplitude ``drive_amp``."""
    out = L.static_part @ rho_vec
    if drive_amp:
        out = out + drive_amp * (L.drive_commutator @ rho_vec)
    return out


def dissipator(c: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``c rho c^dag - {c^dag c, rho} / 2`` evaluated directly on matrices."""
    cd = c.conj().T
    return c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c)


class _MatrixGenerator:
    """Matrix-form evaluation of the same generator as a :class:`Superoperator`.

    Writes the generator as ``M + M^dag`` with
    ``M = K rho + sum(C rho C^dag) / 2`` and ``K = -i H - sum(C^dag C) / 2``;
    the result is Hermitian to the last bit.  Collapse operators with at most
    one entry per row are applied elementwise: diagonal ones (``Jz``) as a
    weight on ``rho``, constant index shifts (``a``, ``J-``) as a weight on a
    shifted slice of ``rho``, anything else as a gather.  Assumes ``rho`` is
    Hermitian.
    """

    def __init__(self, L: Superoperator):
        k = -1j * L.hamiltonian
        for c in L.collapse:
            k = k - 0.5 * (c.conj().T @ c)
        self.k = k.tocsr()
        self.kd = (-1j * L.drive_op).tocsr()
        # K + amp * Kd shares the sparsity pattern of K + Kd
        pattern = (abs(self.k) + abs(self.kd)).tocsr()
        pattern.sort_indices()
        self._k_full = self._on_pattern(self.k, pattern)
        self._kd_full = self._on_pattern(self.kd, pattern)
        self._kt = pattern.astype(complex)
        dim = L.hamiltonian.shape[0]
        self.diag_weight = None
        self.shifts = []
        self.gathers = []
        self.generic = []
        for c in L.collapse:
            c = c.tocsr()
            c.eliminate_zeros()
            per_row = np.diff(c.indptr)
            if per_row.max(initial=0) > 1:
                self.generic.append((c, c.conj().T.tocsr()))
                continue
            vals = np.zeros(dim, dtype=complex)
            cols = np.arange(dim)
            rows = np.repeat(np.arange(dim), per_row)
            vals[rows] = c.data
            cols[rows] = c.indices
            w = 0.5 * np.outer(vals, vals.conj())
            offsets = np.unique(c.indices - rows)
            if offsets.size == 1 and offsets[0] == 0:
                self.diag_weight = w if self.diag_weight is None else self.diag_weight + w
            elif offsets.size == 1 and offsets[0] > 0:
                s = int(offsets[0])
                self.shifts.append((s, np.ascontiguousarray(w[: dim - s, : dim - s])))
            else:
                self.gathers.append((np.ix_(cols, cols), w))

    @staticmethod
    def _on_pattern(a: sp.csr_matrix, pattern: sp.csr_matrix) -> np.ndarray:
        """Data of ``a`` laid out on the (superset) sparsity pattern."""
        a = a.tocsr()
        a.sort_indices()
        out = np.zeros(pattern.nnz, dtype=complex)
        for r in range(pattern.shape[0]):
            lo, hi = pattern.indptr[r], pattern.indptr[r + 1]
            alo, ahi = a.indptr[r], a.indptr[r + 1]
            pos = np.searchsorted(pattern.indices[lo:hi], a.indices[alo:ahi])
            out[lo + pos] = a.data[alo:ahi]
        return out

    def __call__(self, drive_amp: float, rho: np.ndarray) -> np.ndarray:
        if drive_amp:
            np.multiply(self._kd_full, drive_amp, out=self._kt.data)
            self._kt.data += self._k_full
            m = self._kt @ rho
        else:
            m = self.k @ rho
        if self.diag_weight is not None:
            m += self.diag_weight * rho
        n = rho.shape[0]
        for s, w in self.shifts:
            m[: n - s, : n - s] += w * rho[s:, s:]
        for idx, w in self.gathers:
            m += w * rho[idx]
        for c, cd in self.generic:
            m += 0.5 * ((c @ rho) @ cd)
        m += m.conj().T
        return m


def lindblad_rhs_matrix(L: Superoperator, drive_amp: float, rho: np.ndarray) -> np.ndarray:
    """Generator applied to a Hermitian matrix ``rho`` without vectorization."""
    return _MatrixGenerator(L)(drive_amp, rho)
