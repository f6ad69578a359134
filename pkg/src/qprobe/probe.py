"""Pointer-basis probe: shift generator, interaction Hamiltonian and premeasurement.

The probe observable is ``A = sum_l a_l |A_l><A_l|``. The conjugate basis
``|B_k> = n^{-1/2} sum_l exp(2 pi i k l / n) |A_l>`` diagonalizes the shift
generator ``P = sum_l l |B_l><B_l|``, and the system-probe coupling is
``H_SP(t) = g(t) s (x) P``. Premeasurement is complete once the integrated
coupling reaches ``G = hbar * 2 pi / n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .linalg import dft_matrix
from .states import Operator, PiecewiseConstant, QuantumState, apply_local, partial_trace, tensor_state

SYSTEM, PROBE = 0, 1


class CouplingProfile(PiecewiseConstant):
    """Non-negative piecewise-constant coupling ``g(t)`` with exact integral."""

    def __post_init__(self):
        super().__post_init__()
        if any(v < 0 for v in self.values):
            raise ValueError("coupling strength must be non-negative")

    def integrated(self, t: float, t0: float = 0.0) -> float:
        """``G = int_{t0}^{t} g``."""
        return self.integral(t, t0)


@dataclass(frozen=True)
class ProbeSetup:
    """Shared system/probe dimension, spectra, coupling and ``hbar``.

    ``a`` and ``s`` default to ``0..n-1``. The default coupling is a unit-length
    pulse that completes premeasurement at ``t = 1``.
    """

    n: int
    a: tuple[float, ...] = ()
    s: tuple[float, ...] = ()
    coupling: CouplingProfile | None = None
    hbar: float = 1.0
    c: float = field(init=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError("n must be positive")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        a = tuple(float(x) for x in self.a) if len(self.a) else tuple(float(l) for l in range(n))
        s = tuple(float(x) for x in self.s) if len(self.s) else tuple(float(j) for j in range(n))
        if len(a) != n or len(s) != n:
            raise ValueError(f"a and s must each have {n} entries")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "c", 2 * np.pi / n)
        if self.coupling is None:
            object.__setattr__(self, "coupling", CouplingProfile((0.0, 1.0), (self.hbar * self.c,)))

    @property
    def completion_G(self) -> float:
        """Integrated coupling ``hbar c`` at which premeasurement is complete."""
        return self.hbar * self.c

    def integrated_coupling(self, t: float, t0: float = 0.0) -> float:
        return self.coupling.integrated(t, t0)

    def with_coupling(self, coupling: CouplingProfile) -> ProbeSetup:
        return ProbeSetup(self.n, self.a, self.s, coupling, self.hbar)

    def with_completion_fraction(self, fraction: float, duration: float = 1.0) -> ProbeSetup:
        """Same setup with a constant pulse on ``[0, duration]`` reaching ``G = fraction * hbar c``."""
        g = fraction * self.completion_G / duration
        return self.with_coupling(CouplingProfile((0.0, duration), (g,)))

    def observable(self) -> NDArray[np.complex128]:
        return np.diag(np.asarray(self.a, dtype=complex))

    def system_observable(self) -> NDArray[np.complex128]:
        return np.diag(np.asarray(self.s, dtype=complex))

    def probe_ground(self) -> QuantumState:
        """``|A_0>``."""
        return QuantumState.basis((self.n,), 0)


def shift_operator(setup: ProbeSetup) -> Operator:
    """``P = F diag(0..n-1) F^dagger`` in the ``|A>`` basis."""
    f = dft_matrix(setup.n)
    p = (f * np.arange(setup.n)) @ f.conj().T
    return Operator(0.5 * (p + p.conj().T), (setup.n,))


def interaction_hamiltonian(setup: ProbeSetup) -> Operator:
    """Time-independent part ``s (x) P`` of ``H_SP``; ``g(t)`` is applied at evolution time."""
    return Operator(np.kron(setup.system_observable(), shift_operator(setup).matrix), (setup.n, setup.n))


def alpha(setup: ProbeSetup, j: int, l: int, t: float) -> complex:
    """Geometric sum ``sum_k exp((2 pi i k / n)(l - j G(t) / (c hbar)))``.

    ``j`` enters as the integer weight of the textbook formula, which coincides
    with the system eigenvalue for the default spectrum ``s_j = j``.
    """
    n = setup.n
    x = l - j * setup.integrated_coupling(t) / (setup.c * setup.hbar)
    k = np.arange(n)
    return complex(np.sum(np.exp(2j * np.pi * k * x / n)))


def alpha_matrix(setup: ProbeSetup, t: float, t0: float = 0.0) -> NDArray[np.complex128]:
    """``alpha[j, l]`` with the actual system eigenvalues ``s_j`` as weights."""
    n = setup.n
    G = setup.integrated_coupling(t, t0)
    k = np.arange(n)
    s = np.asarray(setup.s)
    # phase[j, k] = exp(-i s_j k G / hbar); dft[k, l] = exp(2 pi i k l / n)
    phase = np.exp(-1j * np.outer(s, k) * G / setup.hbar)
    return phase @ (np.sqrt(n) * dft_matrix(n))


def premeasurement_unitary(setup: ProbeSetup, G: float) -> NDArray[np.complex128]:
    """``exp(-i G s (x) P / hbar)`` on the system-probe pair."""
    n = setup.n
    f = dft_matrix(n)
    phases = np.exp(-1j * np.outer(setup.s, np.arange(n)) * G / setup.hbar)
    probe_part = np.kron(np.eye(n), f)
    return probe_part @ np.diag(phases.ravel()) @ probe_part.conj().T


def premeasure(setup: ProbeSetup, state: QuantumState, t: float, t0: float = 0.0) -> QuantumState:
    """Evolve under ``g(t) s (x) P`` from ``t0`` to ``t``; factors other than 0 and 1 are untouched."""
    if len(state.dims) < 2 or state.dims[SYSTEM] != setup.n or state.dims[PROBE] != setup.n:
        raise ValueError(f"state layout {state.dims} lacks system and probe factors of dimension {setup.n}")
    u = premeasurement_unitary(setup, setup.integrated_coupling(t, t0))
    return apply_local(state, u, (SYSTEM, PROBE))


def attach_probe(setup: ProbeSetup, state: QuantumState, probe: QuantumState | None = None) -> QuantumState:
    """Insert the probe (default ``|A_0>``) as factor 1 of a system(+environment) state."""
    probe = setup.probe_ground() if probe is None else probe
    if state.dims[0] != setup.n:
        raise ValueError(f"system factor has dimension {state.dims[0]}, expected {setup.n}")
    if not state.is_pure and probe.is_pure:
        probe = probe.to_density()
    elif state.is_pure and not probe.is_pure:
        state = state.to_density()
    joint = tensor_state([state, probe])
    if len(state.dims) == 1:
        return joint
    nf = len(joint.dims)
    order = [0, nf - 1] + list(range(1, nf - 1))
    return _permute_factors(joint, order)


def _permute_factors(state: QuantumState, order: Sequence[int]) -> QuantumState:
    dims = state.dims
    new_dims = tuple(dims[i] for i in order)
    nf = len(dims)
    if state.is_pure:
        data = np.transpose(state.data.reshape(dims), order).reshape(-1)
    else:
        t = np.transpose(state.data.reshape(dims + dims), list(order) + [nf + i for i in order])
        data = t.reshape(state.dim, state.dim)
    return QuantumState(data, new_dims)


def expected_probe_value(setup: ProbeSetup, state: QuantumState) -> float:
    """Born-rule ``<A>`` on the probe factor of ``state``."""
    if len(state.dims) < 2 or state.dims[PROBE] != setup.n:
        raise ValueError(f"state layout {state.dims} has no probe factor of dimension {setup.n}")
    rho_p = partial_trace(state, {PROBE}).data
    return float(np.real(np.sum(np.diag(rho_p) * np.asarray(setup.a))))


def probe_marginal(setup: ProbeSetup, state: QuantumState) -> NDArray[np.float64]:
    """Probabilities of the probe pointer outcomes ``|A_l>``."""
    return np.clip(np.real(np.diag(partial_trace(state, {PROBE}).data)), 0.0, None)


def expected_probe_closed_form(setup: ProbeSetup, populations: ArrayLike, t: float, t0: float = 0.0) -> float:
    """``<a> = n^{-1} sum_l a_l sum_j |alpha_jl c_j|^2``, normalized by its total weight.

    Depends only on the pointer populations ``p_j = |c_j|^2``, which is why a pure
    state and the matching mixture give the same value.
    """
    p = np.asarray(populations, dtype=float)
    weights = (np.abs(alpha_matrix(setup, t, t0)) ** 2 * p[:, None]).sum(axis=0) / setup.n
    return float(np.dot(setup.a, weights) / weights.sum())
