"""Certifying that an output ``y(t) = <xi|C|xi>`` is decoupled from ``H_SE``.

The output operator is closed under commutation with the drift and control
Hamiltonians. If every element of that span commutes with ``H_SE`` the output
cannot see the interaction, for any control signal. With state feedback the
requirement relaxes to ``[span, H_SE]`` lying inside the span.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .linalg import MatrixSpan, SPAN_TOL, commutator, frobenius_norm, span_extend
from .states import DriftControlSystem, Operator, PiecewiseConstant, QuantumState, evolve_trajectory

DEFAULT_TOL = 1e-8
_EPS = 1e-300


@dataclass(frozen=True)
class DecouplingProblem:
    """Constant output operator, drift, control Hamiltonians and interaction.

    ``drift`` is the full free Hamiltonian ``H_0 (x) I + I (x) H_e``. Set
    ``include_drift=False`` to close only under the controls.
    """

    c0: Operator
    drift: Operator
    controls: tuple[Operator, ...] = ()
    interaction: Operator | None = None
    tol: float = DEFAULT_TOL
    include_drift: bool = True

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        if self.interaction is None:
            object.__setattr__(self, "interaction", Operator.zeros(self.c0.dims))
        ops = [self.drift, *self.controls, self.interaction]
        if any(op.dims != self.c0.dims for op in ops):
            raise ValueError("all operators must share one layout")
        if not all(op.is_hermitian() for op in ops):
            raise ValueError("drift, controls and interaction must be Hermitian")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.c0.dims

    def generators(self) -> list[np.ndarray]:
        gens = [self.drift.matrix] if self.include_drift else []
        return gens + [op.matrix for op in self.controls]


@dataclass(frozen=True)
class DecouplingReport:
    distribution_dim: int
    open_loop_decoupled: bool
    feedback_decoupled: bool
    max_open_loop_residual: float
    max_containment_residual: float
    iterations: int
    simulated_max_deviation: float | None = field(default=None)


def closure(span: MatrixSpan, generators: list[np.ndarray], tol: float = SPAN_TOL) -> tuple[MatrixSpan, int]:
    """Smallest span containing ``span`` and invariant under ``ad_g`` for each generator.

    Breadth-first: each new basis element is commuted with every generator in
    order. A commutator below ``tol * 2 ||g||`` (its largest possible size for a
    unit basis element) is treated as zero. Returns the span and the number of
    commutators evaluated.
    """
    queue = deque(span.basis)
    floors = [tol * 2.0 * frobenius_norm(g) for g in generators]
    evaluated = 0
    while queue:
        b = queue.popleft()
        for g, floor in zip(generators, floors):
            evaluated += 1
            m = commutator(g, b)
            if frobenius_norm(m) <= floor:
                continue
            span, grew = span_extend(span, m, tol)
            if grew:
                queue.append(span.basis[-1])
            if len(span) == span.dim ** 2:
                return span, evaluated
    return span, evaluated


def build_distribution(p: DecouplingProblem, tol: float = SPAN_TOL) -> MatrixSpan:
    """Orthonormal basis of the operator distribution generated from ``C``."""
    return _build(p, tol)[0]


def _build(p: DecouplingProblem, tol: float) -> tuple[MatrixSpan, int]:
    d = p.c0.matrix.shape[0]
    start, _ = span_extend(MatrixSpan(d), p.c0.matrix, tol)
    return closure(start, p.generators(), tol)


def check_open_loop(dist: MatrixSpan, h_se: Operator | np.ndarray, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """``max_B ||[B, H_SE]||_F / ||H_SE||_F`` over the basis, and whether it is below ``tol``."""
    h = h_se.matrix if isinstance(h_se, Operator) else np.asarray(h_se, dtype=complex)
    scale = max(frobenius_norm(h), _EPS)
    residual = max((frobenius_norm(commutator(b, h)) / scale for b in dist.basis), default=0.0)
    return residual < tol, residual


def check_feedback(dist: MatrixSpan, h_se: Operator | np.ndarray, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Relative norm of the part of ``[B, H_SE]`` outside the span, maximized over the basis."""
    h = h_se.matrix if isinstance(h_se, Operator) else np.asarray(h_se, dtype=complex)
    scale = max(frobenius_norm(h), _EPS)
    residual = max((frobenius_norm(dist.residual(commutator(b, h))) / scale for b in dist.basis), default=0.0)
    return residual < tol, residual


def certify(p: DecouplingProblem) -> DecouplingReport:
    dist, evaluated = _build(p, SPAN_TOL)
    ok_open, r_open = check_open_loop(dist, p.interaction, p.tol)
    ok_fb, r_fb = check_feedback(dist, p.interaction, p.tol)
    return DecouplingReport(
        distribution_dim=len(dist),
        open_loop_decoupled=ok_open,
        feedback_decoupled=ok_fb or ok_open,
        max_open_loop_residual=r_open,
        max_containment_residual=r_fb,
        iterations=evaluated,
    )


def _random_pure(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def _trial_deviation(p: DecouplingProblem, rng: np.random.Generator, horizon: float, dt: float,
                     n_segments: int) -> float:
    psi = np.ones(1, dtype=complex)
    for d in p.dims:
        psi = np.kron(psi, _random_pure(rng, d))
    state = QuantumState(psi / np.linalg.norm(psi), p.dims)
    bps = tuple(np.linspace(0.0, horizon, n_segments + 1))
    signals = tuple(PiecewiseConstant(bps, tuple(rng.uniform(-1.0, 1.0, n_segments))) for _ in p.controls)
    coupled = DriftControlSystem(p.drift, p.controls, p.interaction, signals)
    free = coupled.without_interaction()
    c = p.c0.matrix
    _, traj_a = evolve_trajectory(coupled, state, 0.0, horizon, dt)
    _, traj_b = evolve_trajectory(free, state, 0.0, horizon, dt)
    y_a = np.einsum("ti,ij,tj->t", traj_a.conj(), c, traj_a)
    y_b = np.einsum("ti,ij,tj->t", traj_b.conj(), c, traj_b)
    return float(np.max(np.abs(y_a - y_b)))


def simulate_output_invariance(p: DecouplingProblem, n_trials: int, horizon: float, dt: float, seed: int,
                               n_segments: int = 10) -> float:
    """Largest ``|y_with(t) - y_without(t)|`` over random initial product states and controls.

    Each trial draws its own generator from ``SeedSequence(seed).spawn``, so the
    result does not depend on the order trials are evaluated in.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    return max(trial_deviations(p, n_trials, horizon, dt, seed, n_segments))


def trial_deviations(p: DecouplingProblem, n_trials: int, horizon: float, dt: float, seed: int,
                     n_segments: int = 10) -> list[float]:
    children = np.random.SeedSequence(seed).spawn(n_trials)
    return [_trial_deviation(p, np.random.default_rng(ss), horizon, dt, n_segments) for ss in children]
