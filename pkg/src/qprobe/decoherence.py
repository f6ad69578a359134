"""Partial decoherence through environment-correlation matrices.

Row ``j`` of a lambda matrix expands the environment state correlated with
``|s_j>`` over orthonormal classical environment states: ``|e_j> = sum_j' lam[j, j'] |E_j'>``.
Equal rows give a pure system, the identity gives a fully decohered one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .linalg import dft_matrix
from .probe import ProbeSetup, alpha_matrix, attach_probe, expected_probe_value, premeasure
from .protocol import qft_system
from .states import QuantumState

ROW_TOL = 1e-10


@dataclass(frozen=True)
class LambdaMatrix:
    entries: NDArray[np.complex128]

    def __post_init__(self):
        lam = np.array(self.entries, dtype=complex)
        if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
            raise ValueError("lambda matrix must be square")
        norms = np.sum(np.abs(lam) ** 2, axis=1)
        if np.max(np.abs(norms - 1.0)) > ROW_TOL:
            raise ValueError(f"lambda rows must have unit norm (got {norms})")
        lam.setflags(write=False)
        object.__setattr__(self, "entries", lam)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def overlap_gram(self) -> NDArray[np.complex128]:
        """``G[i, j] = <e_i|e_j> = sum_j' conj(lam[i, j']) lam[j, j']``."""
        return self.entries.conj() @ self.entries.T


def lambda_pure(n: int) -> LambdaMatrix:
    lam = np.zeros((n, n), dtype=complex)
    lam[:, 0] = 1.0
    return LambdaMatrix(lam)


def lambda_mixed(n: int) -> LambdaMatrix:
    return LambdaMatrix(np.eye(n, dtype=complex))


def lambda_interpolated(n: int, theta: float) -> LambdaMatrix:
    """Lambda matrix whose overlaps are 1 on the diagonal and ``exp(-theta)`` elsewhere.

    Built as the Cholesky factor of the overlap matrix; ``theta = 0`` is the
    rank-one pure case.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if theta == 0:
        return lambda_pure(n)
    x = np.exp(-theta)
    gram = np.full((n, n), x) + (1.0 - x) * np.eye(n)
    lam = np.linalg.cholesky(gram)
    lam /= np.linalg.norm(lam, axis=1, keepdims=True)
    return LambdaMatrix(lam.astype(complex))


def _amplitudes(c: ArrayLike, n: int | None = None) -> NDArray[np.complex128]:
    c = np.asarray(c, dtype=complex).ravel()
    if n is not None and c.size != n:
        raise ValueError(f"expected {n} amplitudes, got {c.size}")
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise ValueError("amplitudes must be normalized")
    return c


def build_joint(c: ArrayLike, lam: LambdaMatrix) -> QuantumState:
    """``sum_j c_j |s_j> (x) |e_j>`` on layout ``(n, n_env)``."""
    c = _amplitudes(c, lam.n)
    psi = c[:, None] * lam.entries
    return QuantumState(psi.ravel(), (lam.n, lam.n))


def expected_value_partial(setup: ProbeSetup, c: ArrayLike, lam: LambdaMatrix, t: float,
                           t0: float = 0.0) -> float:
    """Closed-form conjugate-basis readout for a partially decohered state.

    Evaluates ``n^{-3/2} sum_l a_l sum_{k,j'} |sum_j c_j exp(2 pi i j k / n) lam[j, j']|^2 |alpha_kl|^2``
    divided by the same sum with all ``a_l = 1``.
    """
    n = setup.n
    c = _amplitudes(c, n)
    if lam.n != n:
        raise ValueError("lambda dimension does not match the probe setup")
    # amp[k, j'] = sum_j exp(2 pi i j k / n) c_j lam[j, j']
    amp = np.sqrt(n) * dft_matrix(n) @ (c[:, None] * lam.entries)
    weight_k = np.sum(np.abs(amp) ** 2, axis=1)
    a2 = np.abs(alpha_matrix(setup, t, t0)) ** 2
    per_l = n ** -1.5 * (weight_k[:, None] * a2).sum(axis=0)
    return float(np.dot(setup.a, per_l) / per_l.sum())


def expected_value_expanded(setup: ProbeSetup, c: ArrayLike, lam: LambdaMatrix, t: float,
                            t0: float = 0.0) -> float:
    """Same value through the population plus interference-term expansion.

    The cross terms are summed once per unordered pair ``j < m`` with weight 2 and
    phase ``exp(2 pi i k (m - j) / n)``; this is the convention that agrees with
    the modulus-squared form.
    """
    n = setup.n
    c = _amplitudes(c, n)
    lam_e = lam.entries
    a2 = np.abs(alpha_matrix(setup, t, t0)) ** 2
    weight_k = np.zeros(n)
    for k in range(n):
        total = np.sum(np.abs(c[:, None] * lam_e) ** 2)
        for j in range(n):
            for m in range(j + 1, n):
                cross = np.sum(np.conj(lam_e[j]) * lam_e[m])
                total += 2 * np.real(np.exp(2j * np.pi * k * (m - j) / n) * np.conj(c[j]) * c[m] * cross)
        weight_k[k] = total
    per_l = n ** -1.5 * (weight_k[:, None] * a2).sum(axis=0)
    return float(np.dot(setup.a, per_l) / per_l.sum())


def born_rule_partial(setup: ProbeSetup, c: ArrayLike, lam: LambdaMatrix, t: float, t0: float = 0.0) -> float:
    """Simulated readout: joint state, fresh probe, QFT, premeasure, ``<A>``."""
    joint = attach_probe(setup, build_joint(c, lam))
    return expected_probe_value(setup, premeasure(setup, qft_system(joint), t, t0))
