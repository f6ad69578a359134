"""QFT-sandwich measurement cycles.

Each cycle applies the DFT to the system, lets the probe interact during a
window, reads the probe's expected value, and undoes the DFT. A mixture that is
diagonal in the pointer basis maps to a uniform conjugate-basis population and
so yields a population-independent readout, while coherent states do not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .linalg import dft_matrix
from .probe import PROBE, SYSTEM, ProbeSetup, attach_probe, expected_probe_value, premeasure
from .states import QuantumState, apply_local, partial_trace

INDICATOR_EPS = 1e-12


@dataclass(frozen=True)
class PulseSchedule:
    """Interaction windows ``(t_start, t_end)``; the QFT pulses sit between them."""

    windows: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        wins = tuple((float(a), float(b)) for a, b in self.windows)
        for a, b in wins:
            if b < a:
                raise ValueError(f"window ({a}, {b}) ends before it starts")
        for (_, b0), (a1, _) in zip(wins, wins[1:]):
            if a1 < b0:
                raise ValueError("interaction windows overlap or are out of order")
        object.__setattr__(self, "windows", wins)

    def __len__(self) -> int:
        return len(self.windows)


@dataclass(frozen=True)
class CycleReadout:
    t: float
    G: float
    expected_a: float
    pure_prediction: float
    mixed_baseline: float
    coherence_indicator: float


def qft_system(state: QuantumState, factor: int = SYSTEM, inverse: bool = False) -> QuantumState:
    """Apply the DFT (or its inverse) to one factor."""
    if not 0 <= factor < len(state.dims):
        raise IndexError(f"factor {factor} out of range for layout {state.dims}")
    f = dft_matrix(state.dims[factor])
    return apply_local(state, f.conj().T if inverse else f, (factor,))


def _conjugate_readout(setup: ProbeSetup, system_state: QuantumState, window: tuple[float, float]) -> float:
    joint = attach_probe(setup, qft_system(system_state))
    return expected_probe_value(setup, premeasure(setup, joint, window[1], window[0]))


def mixed_baseline(setup: ProbeSetup, t: float, t0: float = 0.0) -> float:
    """Conjugate-basis readout of the maximally mixed system state.

    Any state diagonal in the pointer basis gives the same value.
    """
    return _conjugate_readout(setup, QuantumState.maximally_mixed((setup.n,)), (t0, t))


def pure_prediction(setup: ProbeSetup, amplitudes: ArrayLike, t: float, t0: float = 0.0) -> float:
    """Conjugate-basis readout predicted for the pure system state ``sum_j c_j |s_j>``."""
    c = QuantumState.from_vector(amplitudes, (setup.n,), normalize=True)
    return _conjugate_readout(setup, c, (t0, t))


def coherence_indicator(observed: float, pure_pred: float, baseline: float) -> float:
    """0 at the fully decohered baseline, 1 at the pure prediction, clamped to ``[0, 1]``."""
    x = abs(observed - baseline) / max(abs(pure_pred - baseline), INDICATOR_EPS)
    return float(min(max(x, 0.0), 1.0))


def default_candidate(system_state: QuantumState) -> np.ndarray:
    """Pure hypothesis with the state's pointer populations and zero relative phases."""
    rho = partial_trace(system_state, {SYSTEM}).data
    return np.sqrt(np.clip(np.real(np.diag(rho)), 0.0, None))


def conjugate_measure_cycle(setup: ProbeSetup, state: QuantumState, window: tuple[float, float],
                            candidate: ArrayLike | None = None) -> tuple[QuantumState, CycleReadout]:
    """One QFT / interact / read / inverse-QFT cycle.

    Args:
        setup: probe parameters.
        state: joint state with the system on factor 0 and a freshly prepared
            probe on factor 1 (see :func:`qprobe.probe.attach_probe`).
        window: interaction interval; the integrated coupling over it drives the probe.
        candidate: pure system amplitudes used for the pure prediction. Defaults
            to the square roots of the state's pointer populations.

    Returns:
        The post-cycle joint state and the cycle's readout.
    """
    t0, t1 = window
    if t1 < t0:
        raise ValueError("window ends before it starts")
    if len(state.dims) < 2 or state.dims[SYSTEM] != setup.n or state.dims[PROBE] != setup.n:
        raise ValueError(f"state layout {state.dims} lacks system and probe factors of dimension {setup.n}")
    measured = premeasure(setup, qft_system(state), t1, t0)
    observed = expected_probe_value(setup, measured)
    post = qft_system(measured, inverse=True)
    if candidate is None:
        candidate = default_candidate(state)
    pure = pure_prediction(setup, candidate, t1, t0)
    base = mixed_baseline(setup, t1, t0)
    readout = CycleReadout(
        t=t1,
        G=setup.integrated_coupling(t1, t0),
        expected_a=observed,
        pure_prediction=pure,
        mixed_baseline=base,
        coherence_indicator=coherence_indicator(observed, pure, base),
    )
    return post, readout


def run_schedule(setup: ProbeSetup, state: QuantumState, schedule: PulseSchedule,
                 candidate: ArrayLike | None = None,
                 probe: QuantumState | None = None) -> tuple[QuantumState, list[CycleReadout]]:
    """Apply one cycle per window to a system(+environment) state.

    A fresh probe (default ``|A_0>``) is attached at the start of every cycle and
    traced out afterwards; no collapse is applied. Returns the final
    system(+environment) state and the readouts in time order.
    """
    if not isinstance(schedule, PulseSchedule):
        schedule = PulseSchedule(tuple(schedule))
    if candidate is None:
        candidate = default_candidate(state)
    readouts: list[CycleReadout] = []
    keep = [i for i in range(len(state.dims) + 1) if i != PROBE]
    for window in schedule.windows:
        joint = attach_probe(setup, state, probe)
        post, readout = conjugate_measure_cycle(setup, joint, window, candidate)
        readouts.append(readout)
        state = partial_trace(post, keep)
    return state, readouts


def direct_measure_cycle(setup: ProbeSetup, state: QuantumState, window: tuple[float, float]) -> tuple[QuantumState, float]:
    """Probe readout without the QFT sandwich; insensitive to pointer-basis coherence."""
    measured = premeasure(setup, state, window[1], window[0])
    return measured, expected_probe_value(setup, measured)


def direct_readouts(setup: ProbeSetup, state: QuantumState, schedule: PulseSchedule,
                    candidate: Sequence[complex] | None = None) -> list[CycleReadout]:
    """Time series of direct (pointer-basis) readouts with pure and mixed references."""
    if candidate is None:
        candidate = default_candidate(state)
    cand = QuantumState.from_vector(candidate, (setup.n,), normalize=True)
    pops = np.abs(cand.data) ** 2
    mixed = QuantumState(np.diag(pops).astype(complex), (setup.n,))
    keep = [i for i in range(len(state.dims) + 1) if i != PROBE]
    out = []
    for t0, t1 in schedule.windows:
        post, observed = direct_measure_cycle(setup, attach_probe(setup, state), (t0, t1))
        pure = direct_measure_cycle(setup, attach_probe(setup, cand), (t0, t1))[1]
        base = direct_measure_cycle(setup, attach_probe(setup, mixed), (t0, t1))[1]
        out.append(CycleReadout(t1, setup.integrated_coupling(t1, t0), observed, pure, base,
                                coherence_indicator(observed, pure, base)))
        state = partial_trace(post, keep)
    return out
