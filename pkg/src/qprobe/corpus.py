"""Curated output-decoupling problems with known verdicts.

Each entry pairs a :class:`DecouplingProblem` with the expected open-loop and
feedback verdicts. Used by the test suite and the demo scripts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoupling import DecouplingProblem
from .linalg import IDENTITY_2 as I2, SIGMA_X as X, SIGMA_Y as Y, SIGMA_Z as Z
from .states import Operator


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    problem: DecouplingProblem
    open_loop: bool
    feedback: bool


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (m + m.conj().T)


def _random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def decoupling_corpus(seed: int = 2024) -> list[CorpusEntry]:
    rng = np.random.default_rng(seed)
    qubits = (2, 2)
    B = np.diag([1.0, 0.0]).astype(complex)
    H_env = np.array([[0.3, 0.2], [0.2, -0.1]], dtype=complex)
    H_env_diag = np.diag([0.3, -0.2]).astype(complex)

    def op(m, dims=qubits):
        return Operator(m, dims)

    entries = [
        CorpusEntry(
            "commuting_dephasing",
            DecouplingProblem(op(np.kron(Z, I2)), op(np.kron(Z, I2) + np.kron(I2, H_env)),
                              (op(np.kron(Z, I2)),), op(np.kron(Z, B))),
            True, True,
        ),
        CorpusEntry(
            "pauli_closure",
            DecouplingProblem(op(np.kron(X, I2)), op(np.kron(Z, I2) + np.kron(I2, H_env)),
                              (op(np.kron(X, I2)),), op(np.kron(Z, B))),
            False, False,
        ),
        CorpusEntry(
            "no_interaction",
            DecouplingProblem(op(np.kron(X, I2)), op(np.kron(Z, I2) + np.kron(I2, H_env)),
                              (op(np.kron(X, I2)), op(np.kron(Y, I2)))),
            True, True,
        ),
        CorpusEntry(
            "projector_feedback",
            DecouplingProblem(op(np.kron(X, B)), op(np.kron(X, I2) + np.kron(I2, H_env_diag)),
                              (op(np.kron(Z, I2)),), op(np.kron(Z, B))),
            False, True,
        ),
    ]

    # block-diagonal system algebra; the interaction acts blockwise on the environment
    dims = (3, 2)
    v = _random_unitary(rng, 3)
    proj = v @ np.diag([1.0, 1.0, 0.0]) @ v.conj().T
    comp = np.eye(3) - proj

    def blockwise():
        return proj @ _random_hermitian(rng, 3) @ proj + comp @ _random_hermitian(rng, 3) @ comp

    h_env = _random_hermitian(rng, 2)
    entries.append(CorpusEntry(
        "random_block_commutant",
        DecouplingProblem(
            Operator(np.kron(blockwise(), np.eye(2)), dims),
            Operator(np.kron(blockwise(), np.eye(2)) + np.kron(np.eye(3), h_env), dims),
            (Operator(np.kron(blockwise(), np.eye(2)), dims), Operator(np.kron(blockwise(), np.eye(2)), dims)),
            Operator(np.kron(proj, _random_hermitian(rng, 2)) + np.kron(comp, _random_hermitian(rng, 2)), dims),
        ),
        True, True,
    ))

    # system operators diagonal in one random basis; interaction diagonal in it on the system side
    dims = (3, 3)
    w = _random_unitary(rng, 3)

    def diag_in_w():
        return w @ np.diag(rng.normal(size=3)) @ w.conj().T

    h_env = _random_hermitian(rng, 3)
    sys_eye = np.eye(3)
    pointer_projectors = [np.outer(w[:, k], w[:, k].conj()) for k in range(3)]
    coupled = sum(np.kron(pk, _random_hermitian(rng, 3)) for pk in pointer_projectors)
    c0 = np.kron(diag_in_w(), sys_eye)
    drift = np.kron(diag_in_w(), sys_eye) + np.kron(sys_eye, h_env)
    control = np.kron(diag_in_w(), sys_eye)
    entries.append(CorpusEntry(
        "random_diagonal_commutant",
        DecouplingProblem(Operator(c0, dims), Operator(drift, dims), (Operator(control, dims),),
                          Operator(coupled, dims)),
        True, True,
    ))
    entries.append(CorpusEntry(
        "random_generic_interaction",
        DecouplingProblem(Operator(c0, dims), Operator(drift, dims), (Operator(control, dims),),
                          Operator(_random_hermitian(rng, 9), dims)),
        False, False,
    ))
    return entries
