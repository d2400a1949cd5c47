"""Eigenbasis machinery: diagonalization, Bohr frequencies, transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Eigenbasis of a Hamiltonian.

    energies : ascending eigenvalues (length N)
    basis    : unitary with eigenvectors as columns
    bohr     : bohr[n, m] = E_n - E_m
    """

    energies: np.ndarray
    basis: np.ndarray
    bohr: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.energies)


def require_hermitian(mat, tol=HERMITICITY_TOL, name="matrix"):
    mat = np.asarray(mat)
    scale = max(np.abs(mat).max(), 1.0)
    if np.abs(mat - mat.conj().T).max() > tol * scale:
        raise NotHermitian(f"{name} is not Hermitian within {tol}")
    return mat


def diagonalize(H) -> EigenSystem:
    """Dense Hermitian eigendecomposition with a deterministic gauge.

    Ascending energies; within degenerate clusters the eigenvectors are
    ordered by the row index of their dominant component and phased so that
    component is real positive, keeping golden files platform-stable.
    """
    H = require_hermitian(H, name="Hamiltonian")
    energies, basis = np.linalg.eigh(H)
    scale = max(abs(energies[0]), abs(energies[-1]), 1.0)
    # deterministic order inside degenerate clusters
    start = 0
    n = len(energies)
    while start < n:
        stop = start + 1
        while stop < n and energies[stop] - energies[stop - 1] <= 1e-12 * scale:
            stop += 1
        if stop - start > 1:
            block = basis[:, start:stop]
            dom = np.argmax(np.abs(block), axis=0)
            order = np.argsort(dom, kind="stable")
            basis[:, start:stop] = block[:, order]
            energies[start:stop] = energies[start:stop][order]
        start = stop
    # fix phases: dominant component real positive
    dom = np.argmax(np.abs(basis), axis=0)
    phases = basis[dom, np.arange(n)]
    phases = phases / np.abs(phases)
    basis = basis / phases[np.newaxis, :]
    bohr = energies[:, None] - energies[None, :]
    return EigenSystem(energies=energies, basis=basis, bohr=bohr)


def to_eigenbasis(A, es: EigenSystem):
    """basis^dagger @ A @ basis."""
    A = np.asarray(A)
    if A.shape != (es.dim, es.dim):
        raise DimensionMismatch(f"operator shape {A.shape} != {(es.dim, es.dim)}")
    return es.basis.conj().T @ A @ es.basis


def from_eigenbasis(A, es: EigenSystem):
    A = np.asarray(A)
    if A.shape != (es.dim, es.dim):
        raise DimensionMismatch(f"operator shape {A.shape} != {(es.dim, es.dim)}")
    return es.basis @ A @ es.basis.conj().T


def hadamard(A, M):
    """Elementwise product A o M."""
    A = np.asarray(A)
    M = np.asarray(M)
    if A.shape != M.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {M.shape} differ")
    return A * M


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix wrapper."""

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        require_hermitian(m, name="density matrix")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"trace {tr} != 1")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def pure_state(vec) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))
