"""Dense complex linear algebra kernel.

Matrices are numpy arrays with dtype complex128 in row-major layout;
vectors are one-dimensional arrays of the same dtype. All functions are
pure and never mutate their inputs.

Default tolerances: 1e-10 for unitarity/hermiticity checks, 1e-9 relative
for eigenvalue clustering, 1e-12 for entrywise comparisons. Every check
takes an explicit tolerance argument so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ENTRYWISE_TOL = 1e-12
UNITARY_TOL = 1e-10
# Eigenvalues closer than this (relative to the Hilbert-Schmidt norm of the
# matrix) are treated as one degenerate eigenvalue when building projectors.
EIG_CLUSTER_REL_TOL = 1e-9


def as_matrix(a) -> np.ndarray:
    """Coerce input to a 2-D complex128 array (no copy when already one)."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got a {m.ndim}-D input")
    return m


def as_vector(psi) -> np.ndarray:
    """Coerce input to a 1-D complex128 array."""
    v = np.asarray(psi, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got a {v.ndim}-D input")
    return v


def identity(n: int) -> np.ndarray:
    """The n-by-n identity matrix."""
    return np.eye(n, dtype=np.complex128)


def matmul(a, b) -> np.ndarray:
    """Matrix product AB."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    """Conjugate transpose: (A*)_ij = conj(A_ji)."""
    return as_matrix(a).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product A (x) B with A's entries scaling blocks of B."""
    return np.kron(as_matrix(a), as_matrix(b))


def trace(a) -> complex:
    """Sum of diagonal entries of a square matrix."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"trace of a non-square matrix {a.shape}")
    return complex(np.trace(a))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(A* B)."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # tr(A* B) = sum_ij conj(A_ij) B_ij, which is exactly vdot on the
    # flattened arrays.
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm sqrt(tr(A* A))."""
    return float(np.linalg.norm(as_matrix(a)))


def outer(psi, phi) -> np.ndarray:
    """Rank-one matrix with entry (i, j) = psi_i * conj(phi_j)."""
    psi = as_vector(psi)
    phi = as_vector(phi)
    if psi.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {phi.shape}")
    return np.outer(psi, phi.conj())


def is_hermitian(a, tol: float = UNITARY_TOL) -> bool:
    """True when the Frobenius residual of A - A* is at most tol."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return float(np.linalg.norm(a - a.conj().T)) <= tol


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    """True when the Frobenius residual of U*U - I is at most tol."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    n = u.shape[0]
    return float(np.linalg.norm(u.conj().T @ u - np.eye(n))) <= tol


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigendecomposition A = V diag(w) V* of a Hermitian matrix.

    eigenvalues are real and ascending; column i of eigenvectors is a unit
    eigenvector for eigenvalues[i], and the columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        """V diag(w) V*."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(a, tol: float = UNITARY_TOL) -> SpectralDecomp:
    """Eigendecomposition of a Hermitian matrix.

    Requires the input to be Hermitian within tol and guarantees the
    reconstruction residual ||A - V diag(w) V*|| <= tol * max(||A||, 1).
    """
    a = as_matrix(a)
    if not is_hermitian(a, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(a)
    residual = float(np.linalg.norm((v * w) @ v.conj().T - a))
    if residual > tol * max(float(np.linalg.norm(a)), 1.0):
        raise ArithmeticError(
            f"eigendecomposition residual {residual:.3e} exceeds tolerance"
        )
    return SpectralDecomp(eigenvalues=w, eigenvectors=v)


def cluster_indices(values, tol: float) -> list[list[int]]:
    """Group ascending real values into clusters of gap at most tol.

    Returns index groups; consecutive values join one cluster when they are
    within tol of each other.
    """
    groups: list[list[int]] = []
    prev = None
    for i, x in enumerate(np.asarray(values, dtype=np.float64)):
        if prev is not None and abs(x - prev) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
        prev = x
    return groups


def unitary_from_hamiltonian(h, t: float, tol: float = UNITARY_TOL) -> np.ndarray:
    """The unitary exp(-i t H) of a Hermitian generator H.

    Computed through the eigendecomposition of H; the result is checked to
    be unitary within tol.
    """
    h = as_matrix(h)
    if not is_hermitian(h, tol):
        raise ValueError("generator is not Hermitian within tolerance")
    dec = hermitian_eig(h, tol)
    phases = np.exp(-1j * t * dec.eigenvalues)
    u = (dec.eigenvectors * phases) @ dec.eigenvectors.conj().T
    if not is_unitary(u, max(tol, 1e-10)):
        raise ArithmeticError("exponential drifted off the unitary group")
    return u


def frobenius_distance(a, b) -> float:
    """||A - B|| in the Hilbert-Schmidt norm."""
    return float(np.linalg.norm(as_matrix(a) - as_matrix(b)))
