"""States, observables, events, and measurement laws on dense matrices.

A state is a density matrix: Hermitian, positive semidefinite, trace one.
An observable (random variable) is a Hermitian matrix; measuring it in a
state produces its eigenvalues with probabilities Re tr(rho P), where P
projects onto the eigenspace. Only equality events {A = x} are modeled;
interval events are future work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    EIG_CLUSTER_REL_TOL,
    SpectralDecomp,
    as_matrix,
    as_vector,
    cluster_indices,
    hermitian_eig,
    hs_norm,
    is_hermitian,
    is_unitary,
    outer,
)

STATE_TOL = 1e-10
# Probabilities in [-NEGATIVE_PROB_TOL, 0) are rounding noise and clamp to
# zero; anything more negative indicates an invalid state and is an error.
NEGATIVE_PROB_TOL = 1e-12
LAW_SUM_TOL = 1e-9


class StateValidationError(ValueError):
    """A density-matrix condition failed.

    condition is one of "hermitian", "eigenvalues", "trace", naming which
    of the three defining requirements was violated.
    """

    def __init__(self, condition: str, message: str):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class DensityMatrix:
    """A quantum state. Validity is enforced by validate_state."""

    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


class Observable:
    """A Hermitian matrix with its spectral decomposition cached.

    The decomposition is computed once at construction, so instances are
    safe to share across threads.
    """

    def __init__(self, mat, tol: float = STATE_TOL):
        mat = as_matrix(mat)
        if not is_hermitian(mat, tol):
            raise ValueError("observable is not Hermitian within tolerance")
        self.mat = mat
        self.spectral: SpectralDecomp = hermitian_eig(mat, tol)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalue_clusters(self) -> list[tuple[float, list[int]]]:
        """Distinct eigenvalues after clustering, with eigenvector indices.

        Eigenvalues within EIG_CLUSTER_REL_TOL * max(||A||, 1) of each other
        count as one degenerate eigenvalue; the reported value is the cluster
        mean. Returned in ascending order.
        """
        scale = max(hs_norm(self.mat), 1.0)
        groups = cluster_indices(
            self.spectral.eigenvalues, EIG_CLUSTER_REL_TOL * scale
        )
        return [
            (float(np.mean(self.spectral.eigenvalues[g])), g) for g in groups
        ]


@dataclass(frozen=True)
class EventProjector:
    """Orthogonal projector for the event {A = value}.

    proj is the zero matrix when value is not an eigenvalue of A.
    """

    value: float
    proj: np.ndarray


@dataclass(frozen=True)
class Law:
    """Discrete distribution over an observable's eigenvalues.

    outcomes is a tuple of (value, probability) pairs with strictly
    increasing values and probabilities summing to one.
    """

    outcomes: tuple[tuple[float, float], ...]

    def values(self) -> list[float]:
        return [v for v, _ in self.outcomes]

    def probabilities(self) -> list[float]:
        return [p for _, p in self.outcomes]


def pure_state(psi, tol: float = STATE_TOL) -> DensityMatrix:
    """The rank-one state |psi><psi| of a unit vector."""
    psi = as_vector(psi)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state vector norm {norm} is not 1 within {tol}")
    return DensityMatrix(outer(psi, psi))


def validate_state(rho: DensityMatrix, tol: float = STATE_TOL) -> int:
    """Check the three density-matrix conditions and return the rank.

    Raises StateValidationError naming the violated condition: "hermitian"
    (A = A*), "eigenvalues" (all >= -tol), or "trace" (tr = 1). The rank is
    the number of eigenvalues exceeding tol.
    """
    mat = as_matrix(rho.mat)
    if mat.shape[0] != mat.shape[1]:
        raise StateValidationError("hermitian", "state matrix is not square")
    if not is_hermitian(mat, tol):
        raise StateValidationError(
            "hermitian", "state is not Hermitian within tolerance"
        )
    # Hermitize before the eigensolve so roundoff in the input cannot leak
    # imaginary parts into the eigenvalues.
    sym = (mat + mat.conj().T) / 2.0
    eigs = np.linalg.eigvalsh(sym)
    if float(eigs[0]) < -tol:
        raise StateValidationError(
            "eigenvalues", f"negative eigenvalue {float(eigs[0]):.3e}"
        )
    tr = complex(np.trace(mat))
    if abs(tr - 1.0) > tol:
        raise StateValidationError("trace", f"trace {tr} is not 1")
    return int(np.count_nonzero(eigs > tol))


def event_projector(a: Observable, x: float, tol: float = 1e-9) -> EventProjector:
    """Projector onto the eigenspace of the eigenvalue matching x.

    x matches a clustered eigenvalue when it lies within tol of the cluster
    value; with no match the projector is the zero matrix.
    """
    for value, idx in a.eigenvalue_clusters():
        if abs(x - value) <= tol:
            cols = a.spectral.eigenvectors[:, idx]
            return EventProjector(value=value, proj=cols @ cols.conj().T)
    n = a.dim
    return EventProjector(value=float(x), proj=np.zeros((n, n), dtype=np.complex128))


def law(a: Observable, rho: DensityMatrix, tol: float = LAW_SUM_TOL) -> Law:
    """Measurement distribution of observable a in state rho.

    One outcome per clustered eigenvalue, with probability Re tr(rho P).
    Probabilities are clamped to [0, 1]; values below -1e-12 raise, and the
    total must equal 1 within tol.
    """
    validate_state(rho)
    if a.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {rho.dim}")
    outcomes = []
    vectors = a.spectral.eigenvectors
    for value, idx in a.eigenvalue_clusters():
        cols = vectors[:, idx]
        # tr(rho P) with P = C C* equals sum of <c| rho |c> over columns.
        p = float(np.real(np.einsum("ij,ik,kj->", cols.conj(), rho.mat, cols)))
        if p < -NEGATIVE_PROB_TOL:
            raise StateValidationError(
                "eigenvalues", f"probability {p:.3e} below the rounding floor"
            )
        outcomes.append((value, min(max(p, 0.0), 1.0)))
    total = sum(p for _, p in outcomes)
    if abs(total - 1.0) > tol:
        raise ArithmeticError(f"law probabilities sum to {total}, not 1")
    return Law(outcomes=tuple(outcomes))


def conjugate(m, v, tol: float = STATE_TOL) -> np.ndarray:
    """V M V* for a unitary V; preserves laws of states and observables."""
    m = as_matrix(m)
    v = as_matrix(v)
    if not is_unitary(v, tol):
        raise ValueError("conjugating matrix is not unitary within tolerance")
    return v @ m @ v.conj().T
