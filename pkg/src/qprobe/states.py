"""Quantum states and operators over tensor-factor layouts, and their evolution.

A layout is a tuple of subsystem dimensions, e.g. ``(n_system, n_probe, n_env)``.
Factor 0 is the leftmost Kronecker factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .linalg import as_matrix, is_hermitian, kron_all

NORM_TOL = 1e-10
PSD_FLOOR = -1e-9

Layout = tuple[int, ...]


def check_layout(dims: Sequence[int]) -> Layout:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"invalid layout {dims}")
    return dims


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuantumState:
    """Pure state vector (1-D ``data``) or density matrix (2-D ``data``)."""

    data: NDArray[np.complex128]
    dims: Layout

    def __post_init__(self):
        object.__setattr__(self, "dims", check_layout(self.dims))
        object.__setattr__(self, "data", _frozen(self.data))
        d = self.dim
        if not np.all(np.isfinite(self.data)):
            raise ValueError("state has non-finite entries")
        if self.data.ndim == 1:
            if self.data.shape != (d,):
                raise ValueError(f"vector of length {self.data.shape[0]} does not match layout {self.dims}")
            if abs(np.linalg.norm(self.data) - 1.0) > NORM_TOL:
                raise ValueError(f"state vector not normalized (norm {np.linalg.norm(self.data):.12g})")
        elif self.data.ndim == 2:
            rho = self.data
            if rho.shape != (d, d):
                raise ValueError(f"density of shape {rho.shape} does not match layout {self.dims}")
            if np.linalg.norm(rho - rho.conj().T) > NORM_TOL:
                raise ValueError("density matrix not Hermitian")
            if abs(np.trace(rho) - 1.0) > NORM_TOL:
                raise ValueError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
            if np.linalg.eigvalsh(rho).min() < PSD_FLOOR:
                raise ValueError("density matrix not positive semidefinite")
        else:
            raise ValueError("state data must be a vector or a square matrix")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def is_pure(self) -> bool:
        """True when stored as a vector (not a test of purity)."""
        return self.data.ndim == 1

    @classmethod
    def basis(cls, dims: Sequence[int], index: int | Sequence[int]) -> QuantumState:
        dims = check_layout(dims)
        flat = index if isinstance(index, (int, np.integer)) else int(np.ravel_multi_index(tuple(index), dims))
        v = np.zeros(int(np.prod(dims)), dtype=complex)
        v[flat] = 1.0
        return cls(v, dims)

    @classmethod
    def from_vector(cls, v: ArrayLike, dims: Sequence[int] | None = None, normalize: bool = False) -> QuantumState:
        v = np.asarray(v, dtype=complex).ravel()
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(v, (v.size,) if dims is None else dims)

    @classmethod
    def from_density(cls, rho: ArrayLike, dims: Sequence[int] | None = None) -> QuantumState:
        rho = as_matrix(rho)
        return cls(rho, (rho.shape[0],) if dims is None else dims)

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> QuantumState:
        dims = check_layout(dims)
        d = int(np.prod(dims))
        return cls(np.eye(d, dtype=complex) / d, dims)

    def density_matrix(self) -> NDArray[np.complex128]:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def to_density(self) -> QuantumState:
        return self if not self.is_pure else QuantumState(self.density_matrix(), self.dims)

    def purity(self) -> float:
        if self.is_pure:
            return 1.0
        rho = self.data
        return float(np.real(np.vdot(rho.conj().T, rho)))

    def norm_defect(self) -> float:
        if self.is_pure:
            return abs(float(np.linalg.norm(self.data)) - 1.0)
        return abs(complex(np.trace(self.data)) - 1.0)

    def fidelity(self, other: QuantumState) -> float:
        """``|<a|b>|`` for two pure states, ``<a|rho|a>`` for pure vs mixed.

        Two mixed states use the Uhlmann fidelity ``(tr sqrt(sqrt(r) s sqrt(r)))^2``.
        """
        if self.dims != other.dims:
            raise ValueError(f"layout mismatch {self.dims} vs {other.dims}")
        if self.is_pure and other.is_pure:
            return float(abs(np.vdot(self.data, other.data)))
        if self.is_pure or other.is_pure:
            psi, rho = (self.data, other.data) if self.is_pure else (other.data, self.data)
            return float(np.real(np.vdot(psi, rho @ psi)))
        w, v = np.linalg.eigh(self.data)
        sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
        inner = np.linalg.eigvalsh(sq @ other.data @ sq)
        return float(np.sum(np.sqrt(np.clip(inner, 0, None))) ** 2)


@dataclass(frozen=True)
class Operator:
    """Square matrix tagged with the layout it acts on."""

    matrix: NDArray[np.complex128]
    dims: Layout

    def __post_init__(self):
        object.__setattr__(self, "dims", check_layout(self.dims))
        m = _frozen(as_matrix(self.matrix))
        d = int(np.prod(self.dims))
        if m.shape != (d, d):
            raise ValueError(f"operator of shape {m.shape} does not match layout {self.dims}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> Operator:
        d = int(np.prod(dims))
        return cls(np.zeros((d, d), dtype=complex), dims)

    @classmethod
    def local(cls, mat: ArrayLike, factor: int, dims: Sequence[int]) -> Operator:
        """Embed ``mat`` acting on one factor as ``I x ... x mat x ... x I``."""
        dims = check_layout(dims)
        if not 0 <= factor < len(dims):
            raise IndexError(f"factor {factor} out of range for layout {dims}")
        parts = [np.eye(d, dtype=complex) for d in dims]
        parts[factor] = as_matrix(mat)
        return cls(kron_all(*parts), dims)

    def is_hermitian(self) -> bool:
        return is_hermitian(self.matrix)

    def __add__(self, other: Operator) -> Operator:
        if self.dims != other.dims:
            raise ValueError("layout mismatch")
        return Operator(self.matrix + other.matrix, self.dims)

    def scaled(self, x: complex) -> Operator:
        return Operator(x * self.matrix, self.dims)


def tensor_state(parts: Sequence[QuantumState]) -> QuantumState:
    """Kronecker product of states with concatenated layouts."""
    if not parts:
        raise ValueError("need at least one state")
    kinds = {p.is_pure for p in parts}
    if len(kinds) != 1:
        raise ValueError("cannot tensor pure and density states together; convert first")
    dims: tuple[int, ...] = ()
    out = np.ones(1 if parts[0].is_pure else (1, 1), dtype=complex)
    for p in parts:
        out = np.kron(out, p.data)
        dims += p.dims
    return QuantumState(out, dims)


def partial_trace(rho: QuantumState, keep: Sequence[int] | set[int]) -> QuantumState:
    """Reduced density matrix on the factors in ``keep`` (returned in layout order)."""
    keep = sorted(set(int(k) for k in keep))
    nf = len(rho.dims)
    if not keep or any(k < 0 or k >= nf for k in keep):
        raise IndexError(f"invalid factors {keep} for layout {rho.dims}")
    dims = rho.dims
    kept_dims = tuple(dims[k] for k in keep)
    dk = int(np.prod(kept_dims))
    traced = [i for i in range(nf) if i not in keep]
    if rho.is_pure:
        psi = rho.data.reshape(dims)
        psi = np.transpose(psi, keep + traced).reshape(dk, -1)
        red = psi @ psi.conj().T
    else:
        t = rho.data.reshape(dims + dims)
        t = np.transpose(t, keep + traced + [nf + i for i in keep] + [nf + i for i in traced])
        rest = int(np.prod([dims[i] for i in traced])) if traced else 1
        red = np.einsum("arbr->ab", t.reshape(dk, rest, dk, rest))
    red = 0.5 * (red + red.conj().T)
    return QuantumState(red, kept_dims)


def _apply_left(tensor: np.ndarray, u: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``u`` (acting on the joint space of ``axes``) into ``tensor``."""
    axes = list(axes)
    rest = [i for i in range(tensor.ndim) if i not in axes]
    perm = axes + rest
    t = np.transpose(tensor, perm)
    shp = t.shape
    t = (u @ t.reshape(u.shape[1], -1)).reshape(shp)
    return np.transpose(t, np.argsort(perm))


def apply_local(state: QuantumState, u: ArrayLike, factors: Sequence[int]) -> QuantumState:
    """Apply a unitary acting on the listed factors (in the given order)."""
    u = as_matrix(u)
    factors = [int(f) for f in factors]
    if any(f < 0 or f >= len(state.dims) for f in factors) or len(set(factors)) != len(factors):
        raise IndexError(f"invalid factors {factors} for layout {state.dims}")
    d_sub = int(np.prod([state.dims[f] for f in factors]))
    if u.shape != (d_sub, d_sub):
        raise ValueError(f"unitary of shape {u.shape} does not act on factors {factors} of {state.dims}")
    dims = state.dims
    nf = len(dims)
    if state.is_pure:
        t = _apply_left(state.data.reshape(dims), u, factors)
        return QuantumState(t.reshape(-1), dims)
    t = state.data.reshape(dims + dims)
    t = _apply_left(t, u, factors)
    t = _apply_left(t, u.conj(), [nf + f for f in factors])
    d = state.dim
    rho = t.reshape(d, d)
    return QuantumState(0.5 * (rho + rho.conj().T), dims)


def expectation(state: QuantumState, c: Operator | ArrayLike) -> complex:
    """``<psi|C|psi>`` for pure states, ``tr(rho C)`` for density matrices."""
    mat = c.matrix if isinstance(c, Operator) else as_matrix(c)
    if isinstance(c, Operator) and c.dims != state.dims:
        raise ValueError(f"layout mismatch {c.dims} vs {state.dims}")
    if mat.shape != (state.dim, state.dim):
        raise ValueError(f"operator of shape {mat.shape} does not act on dimension {state.dim}")
    if state.is_pure:
        return complex(np.vdot(state.data, mat @ state.data))
    return complex(np.trace(state.data @ mat))


@dataclass(frozen=True)
class PiecewiseConstant:
    """Real signal equal to ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``, zero elsewhere."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(bp) != len(vals) + 1:
            raise ValueError("need exactly one more breakpoint than values")
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not all(np.isfinite(bp)) or not all(np.isfinite(vals)):
            raise ValueError("non-finite signal data")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float, t0: float, t1: float) -> PiecewiseConstant:
        return cls((t0, t1), (value,))

    def __call__(self, t: float | ArrayLike) -> float | NDArray[np.float64]:
        t_arr = np.asarray(t, dtype=float)
        if not self.values:
            out = np.zeros_like(t_arr)
        else:
            idx = np.searchsorted(self.breakpoints, t_arr, side="right") - 1
            inside = (idx >= 0) & (idx < len(self.values))
            vals = np.asarray(self.values)
            out = np.where(inside, vals[np.clip(idx, 0, len(self.values) - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def integral(self, t: float, t0: float = 0.0) -> float:
        """Exact ``int_{t0}^{t} signal``."""
        return self._cumulative(t) - self._cumulative(t0)

    def _cumulative(self, t: float) -> float:
        bp = self.breakpoints
        total = 0.0
        for (b0, b1), v in zip(zip(bp, bp[1:]), self.values):
            if t <= b0:
                break
            total += v * (min(t, b1) - b0)
        return total


@dataclass(frozen=True)
class DriftControlSystem:
    """``H(t) = drift + sum_i u_i(t) controls[i] + interaction``."""

    drift: Operator
    controls: tuple[Operator, ...] = ()
    interaction: Operator | None = None
    control_signals: tuple[PiecewiseConstant, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "control_signals", tuple(self.control_signals))
        if len(self.controls) != len(self.control_signals):
            raise ValueError("one control signal per control Hamiltonian is required")
        ops = [self.drift, *self.controls] + ([self.interaction] if self.interaction is not None else [])
        if any(op.dims != self.drift.dims for op in ops):
            raise ValueError("all operators must share one layout")
        if not all(op.is_hermitian() for op in ops):
            raise ValueError("Hamiltonian terms must be Hermitian")

    @property
    def dims(self) -> Layout:
        return self.drift.dims

    def hamiltonian(self, u: Sequence[float]) -> NDArray[np.complex128]:
        h = np.array(self.drift.matrix)
        for ui, op in zip(u, self.controls):
            h = h + ui * op.matrix
        if self.interaction is not None:
            h = h + self.interaction.matrix
        return h

    def without_interaction(self) -> DriftControlSystem:
        return DriftControlSystem(self.drift, self.controls, None, self.control_signals)


def _step_grid(t0: float, t1: float, dt: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Left endpoints and lengths of the time steps covering ``[t0, t1]``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    span = t1 - t0
    n = int(np.ceil(span / dt - 1e-9)) if span > 0 else 0
    starts = t0 + dt * np.arange(n)
    lengths = np.full(n, dt)
    if n:
        lengths[-1] = t1 - starts[-1]
    return starts, lengths


def _segments(sys: DriftControlSystem, t0: float, t1: float, dt: float) -> Iterator[tuple[np.ndarray, float, int]]:
    """Yield ``(H, step, count)`` runs of identical steps (left-endpoint control sampling)."""
    starts, lengths = _step_grid(t0, t1, dt)
    if starts.size == 0:
        return
    if sys.control_signals:
        u = np.stack([np.atleast_1d(sig(starts)) for sig in sys.control_signals], axis=1)
    else:
        u = np.zeros((starts.size, 0))
    key = np.column_stack([u, lengths])
    change = np.any(key[1:] != key[:-1], axis=1)
    bounds = np.concatenate([[0], np.nonzero(change)[0] + 1, [starts.size]])
    for a, b in zip(bounds[:-1], bounds[1:]):
        yield sys.hamiltonian(u[a]), float(lengths[a]), int(b - a)


def _evolve_block(data: np.ndarray, h: np.ndarray, step: float, count: int, hbar: float, pure: bool,
                  trajectory: bool) -> np.ndarray:
    evals, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    if pure:
        coeff = v.conj().T @ data
        if not trajectory:
            return v @ (np.exp(-1j * evals * step * count / hbar) * coeff)
        k = np.arange(1, count + 1)[:, None]
        return (np.exp(-1j * evals[None, :] * step * k / hbar) * coeff[None, :]) @ v.T
    rho_e = v.conj().T @ data @ v
    if not trajectory:
        ph = np.exp(-1j * evals * step * count / hbar)
        return v @ (rho_e * np.outer(ph, ph.conj())) @ v.conj().T
    k = np.arange(1, count + 1)[:, None]
    ph = np.exp(-1j * evals[None, :] * step * k / hbar)
    blocks = rho_e[None] * ph[:, :, None] * ph.conj()[:, None, :]
    return np.einsum("ij,kjl,ml->kim", v, blocks, v.conj())


def evolve(sys: DriftControlSystem, state: QuantumState, t0: float, t1: float, dt: float,
           hbar: float = 1.0) -> QuantumState:
    """Propagate ``state`` from ``t0`` to ``t1`` with piecewise-constant steps of ``dt``.

    Controls are sampled at the left endpoint of each step. Runs of steps with the
    same Hamiltonian are applied as a single exact exponential, which equals the
    ordered product of the per-step propagators.
    """
    if state.dims != sys.dims:
        raise ValueError(f"layout mismatch {state.dims} vs {sys.dims}")
    data = np.array(state.data)
    for h, step, count in _segments(sys, t0, t1, dt):
        data = _evolve_block(data, h, step, count, hbar, state.is_pure, trajectory=False)
    if not state.is_pure:
        data = 0.5 * (data + data.conj().T)
    return QuantumState(data, state.dims)


def evolve_trajectory(sys: DriftControlSystem, state: QuantumState, t0: float, t1: float, dt: float,
                      hbar: float = 1.0) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """Like :func:`evolve` but returns times and raw state data after every step.

    The first entry is the initial state at ``t0``.
    """
    if state.dims != sys.dims:
        raise ValueError(f"layout mismatch {state.dims} vs {sys.dims}")
    starts, lengths = _step_grid(t0, t1, dt)
    times = np.concatenate([[t0], starts + lengths])
    out = [np.array(state.data)[None]]
    current = np.array(state.data)
    for h, step, count in _segments(sys, t0, t1, dt):
        block = _evolve_block(current, h, step, count, hbar, state.is_pure, trajectory=True)
        out.append(block)
        current = block[-1]
    return times, np.concatenate(out, axis=0)
