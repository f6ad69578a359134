"""Dense complex linear algebra kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Operator space is
equipped with the Frobenius inner product ``tr(A^dagger B)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NumericalPreconditionError

CMatrix = NDArray[np.complex128]

HERMITIAN_TOL = 1e-10
SPAN_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def as_matrix(a: ArrayLike) -> CMatrix:
    """Coerce to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square_pair(a: ArrayLike, b: ArrayLike) -> tuple[CMatrix, CMatrix]:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"need square matrices of equal size, got {a.shape} and {b.shape}")
    return a, b


def kron(a: ArrayLike, b: ArrayLike) -> CMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*factors: ArrayLike) -> CMatrix:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def dagger(a: ArrayLike) -> CMatrix:
    return np.conj(as_matrix(a)).T


def commutator(a: ArrayLike, b: ArrayLike) -> CMatrix:
    """Return ``ab - ba``."""
    a, b = _square_pair(a, b)
    return a @ b - b @ a


def ad_power(h: ArrayLike, c: ArrayLike, j: int) -> CMatrix:
    """Iterated adjoint action ``ad_h^j(c) = [h, [h, ... [h, c]]]``."""
    if j < 0:
        raise ValueError("j must be non-negative")
    h, out = _square_pair(h, c)
    for _ in range(j):
        out = h @ out - out @ h
    return out


def frobenius_inner(a: ArrayLike, b: ArrayLike) -> complex:
    """``tr(a^dagger b)``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def frobenius_norm(a: ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def hermiticity_defect(h: ArrayLike) -> float:
    h = as_matrix(h)
    return float(np.linalg.norm(h - h.conj().T))


def is_hermitian(h: ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        return False
    return hermiticity_defect(h) <= tol * max(1.0, frobenius_norm(h))


def propagator(h: ArrayLike, theta: float) -> CMatrix:
    """``exp(-i theta h)`` for Hermitian ``h`` via eigendecomposition.

    Raises:
        NumericalPreconditionError: if ``h`` is not Hermitian within tolerance.
    """
    h = as_matrix(h)
    if not is_hermitian(h):
        raise NumericalPreconditionError(
            f"propagator needs a Hermitian generator (defect {hermiticity_defect(h):.3e})"
        )
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (evecs * np.exp(-1j * theta * evals)) @ evecs.conj().T


def dft_matrix(n: int) -> CMatrix:
    """Unitary DFT with entry ``(k, l) = n^{-1/2} exp(2 pi i k l / n)``."""
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(n)
    # reduce kl mod n before the exponential so large phases stay exact
    return np.exp(2j * np.pi * (np.outer(k, k) % n) / n) / np.sqrt(n)


@dataclass(frozen=True)
class MatrixSpan:
    """Subspace of ``dim x dim`` matrices held as a Frobenius-orthonormal basis."""

    dim: int
    basis: tuple[CMatrix, ...] = field(default=())

    def __post_init__(self):
        for b in self.basis:
            if b.shape != (self.dim, self.dim):
                raise ValueError(f"basis element of shape {b.shape} in span of dim {self.dim}")
            b.setflags(write=False)

    def __len__(self) -> int:
        return len(self.basis)

    def gram(self) -> CMatrix:
        flat = np.array([b.ravel() for b in self.basis]).reshape(len(self.basis), -1)
        return flat.conj() @ flat.T

    def coefficients(self, m: ArrayLike) -> NDArray[np.complex128]:
        m = np.asarray(m, dtype=complex)
        return np.array([np.vdot(b, m) for b in self.basis], dtype=complex)

    def residual(self, m: ArrayLike) -> CMatrix:
        """Component of ``m`` orthogonal to the span."""
        r = np.array(m, dtype=complex)
        # two Gram-Schmidt passes keep orthogonality at round-off level
        for _ in range(2):
            for b in self.basis:
                r = r - np.vdot(b, r) * b
        return r

    def contains(self, m: ArrayLike, tol: float = SPAN_TOL) -> bool:
        norm = frobenius_norm(m)
        return norm == 0.0 or frobenius_norm(self.residual(m)) <= tol * norm


def span_extend(s: MatrixSpan, m: ArrayLike, tol: float = SPAN_TOL) -> tuple[MatrixSpan, bool]:
    """Add ``m`` to the span if it is not already (relatively) contained in it.

    Returns the possibly enlarged span and whether it grew.
    """
    m = as_matrix(m)
    if m.shape != (s.dim, s.dim):
        raise ValueError(f"matrix of shape {m.shape} does not fit span of dim {s.dim}")
    norm = frobenius_norm(m)
    if norm == 0.0:
        return s, False
    r = s.residual(m)
    rnorm = frobenius_norm(r)
    if rnorm <= tol * norm:
        return s, False
    return MatrixSpan(s.dim, s.basis + (r / rnorm,)), True
