"""Population tomography from shifted probe wavefunctions.

After the interaction the probe wavefunction ``phi(a)`` is displaced by ``-G s_j``
on branch ``j``, so the readout density is the mixture
``f(a) = sum_j p_j |phi(a + G s_j)|^2``. The populations ``p_j`` are recovered
by simplex-constrained least squares against the shifted kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import ndtr

from .errors import NumericalPreconditionError

MASS_LOSS_TOL = 1e-4
GRAM_COND_MAX = 1e8
DEFAULT_POINTS = 2048


@dataclass(frozen=True)
class ProbeWavefunction:
    """Gaussian probe amplitude ``phi(a)`` with ``|phi|^2`` of mean ``center`` and s.d. ``sigma``."""

    center: float
    sigma: float
    grid: tuple[float, float, int]
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError(f"unsupported wavefunction kind {self.kind!r}")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        lo, hi, npts = self.grid
        if not hi > lo or int(npts) < 2:
            raise ValueError("grid needs a_max > a_min and at least two points")
        object.__setattr__(self, "grid", (float(lo), float(hi), int(npts)))

    @classmethod
    def for_shifts(cls, sigma: float, G: float, s: Sequence[float], center: float = 0.0,
                   n_points: int = DEFAULT_POINTS) -> ProbeWavefunction:
        """Grid spanning ``center +- 6 (sigma + |G| max|s|)``."""
        half = 6.0 * (sigma + abs(G) * float(np.max(np.abs(s))))
        return cls(center, sigma, (center - half, center + half, n_points))

    @property
    def points(self) -> NDArray[np.float64]:
        lo, hi, npts = self.grid
        return np.linspace(lo, hi, npts)

    def amplitude(self, a: ArrayLike) -> NDArray[np.float64]:
        a = np.asarray(a, dtype=float)
        return (2 * np.pi * self.sigma ** 2) ** -0.25 * np.exp(-((a - self.center) ** 2) / (4 * self.sigma ** 2))

    def intensity(self, a: ArrayLike) -> NDArray[np.float64]:
        return np.abs(self.amplitude(a)) ** 2

    def cdf(self, a: ArrayLike) -> NDArray[np.float64]:
        return ndtr((np.asarray(a, dtype=float) - self.center) / self.sigma)

    def shifted(self, delta: float) -> ProbeWavefunction:
        lo, hi, npts = self.grid
        return ProbeWavefunction(self.center + delta, self.sigma, (lo, hi, npts), self.kind)


@dataclass(frozen=True)
class SampledDensity:
    grid: NDArray[np.float64]
    values: NDArray[np.float64]

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def mean(self) -> float:
        return float(np.trapezoid(self.grid * self.values, self.grid))


@dataclass(frozen=True)
class Histogram:
    bin_edges: NDArray[np.float64]
    counts: NDArray[np.float64]

    @classmethod
    def from_samples(cls, samples: ArrayLike, bin_edges: ArrayLike) -> Histogram:
        counts, edges = np.histogram(np.asarray(samples), bins=np.asarray(bin_edges))
        return cls(edges.astype(float), counts.astype(float))


@dataclass(frozen=True)
class PopulationEstimate:
    p_hat: NDArray[np.float64]
    residual_norm: float
    p_unconstrained: NDArray[np.float64]


def _kernels(phi: ProbeWavefunction, G: float, s: Sequence[float], a: NDArray[np.float64]) -> NDArray[np.float64]:
    """Column ``j`` holds ``|phi(a + G s_j)|^2``."""
    return np.stack([phi.intensity(a + G * sj) for sj in s], axis=1)


def post_interaction_distribution(phi: ProbeWavefunction, G: float, s: Sequence[float],
                                  p: ArrayLike) -> SampledDensity:
    """``f(a) = sum_j p_j |phi(a + G s_j)|^2`` on the wavefunction's grid.

    Raises:
        NumericalPreconditionError: if some shifted component loses more than
            ``1e-4`` of its mass off the grid.
    """
    p = np.asarray(p, dtype=float)
    if G == 0:
        raise ValueError("G must be non-zero")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9 or p.size != len(s):
        raise ValueError("p must be a probability vector matching s")
    a = phi.points
    lo, hi, _ = phi.grid
    for j, sj in enumerate(s):
        # component j is |phi|^2 displaced by -G s_j
        inside = phi.cdf(hi + G * sj) - phi.cdf(lo + G * sj)
        if 1.0 - inside > MASS_LOSS_TOL:
            raise NumericalPreconditionError(f"grid too narrow: component {j} loses {1 - inside:.2e} of its mass")
    return SampledDensity(a, _kernels(phi, G, s, a) @ p)


def kernel_w(phi: ProbeWavefunction, G: float, mean_a: float, s_shift: ArrayLike) -> NDArray[np.float64] | float:
    """``W(s - s_j) = |G| |phi(<a> - G (s - s_j))|^2``, a density in ``s``."""
    out = abs(G) * phi.intensity(mean_a - G * np.asarray(s_shift, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def system_density(phi: ProbeWavefunction, G: float, s: Sequence[float], p: ArrayLike,
                   s_grid: ArrayLike, mean_a: float | None = None) -> NDArray[np.float64]:
    """``f(s) = sum_j W(s - s_j) p_j``; ``<a>`` defaults to the probe's pre-interaction mean."""
    mean_a = phi.center if mean_a is None else mean_a
    s_grid = np.asarray(s_grid, dtype=float)
    return sum(pj * kernel_w(phi, G, mean_a, s_grid - sj) for pj, sj in zip(np.asarray(p, dtype=float), s))


def sample_outcomes(f: SampledDensity, n_samples: int, seed: int) -> NDArray[np.float64]:
    """Inverse-CDF samples from a gridded density (linear CDF interpolation)."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    x = np.asarray(f.grid, dtype=float)
    y = np.clip(np.asarray(f.values, dtype=float), 0.0, None)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    u = np.random.default_rng(seed).random(n_samples)
    return np.interp(u, cdf, x)


def simplex_least_squares(k: NDArray[np.float64], f: NDArray[np.float64], tol: float = 1e-12,
                          max_iter: int = 500) -> NDArray[np.float64]:
    """``argmin ||K p - f||`` over the probability simplex (primal active set)."""
    q = k.T @ k
    b = k.T @ f
    n = q.shape[0]
    p = np.full(n, 1.0 / n)
    free = np.ones(n, dtype=bool)
    scale = max(np.abs(q).max(), 1.0)

    for _ in range(max_iter):
        idx = np.nonzero(free)[0]
        m = idx.size
        kkt = np.zeros((m + 1, m + 1))
        kkt[:m, :m] = q[np.ix_(idx, idx)]
        kkt[:m, m] = kkt[m, :m] = 1.0
        sol = np.linalg.solve(kkt, np.concatenate([b[idx], [1.0]]))
        x, mu = sol[:m], sol[m]
        if np.all(x >= -tol):
            p = np.zeros(n)
            p[idx] = np.clip(x, 0.0, None)
            lagrange = q @ p - b + mu
            bound = np.nonzero(~free)[0]
            if bound.size == 0 or lagrange[bound].min() >= -tol * scale:
                return p / p.sum()
            free[bound[np.argmin(lagrange[bound])]] = True
            continue
        # step from the feasible point towards x until the first variable hits zero
        cur = p[idx]
        blocking = x < 0
        ratios = cur[blocking] / (cur[blocking] - x[blocking])
        step = ratios.min()
        p = np.zeros(n)
        p[idx] = cur + step * (x - cur)
        hit = idx[blocking][np.argmin(ratios)]
        p[hit] = 0.0
        free[hit] = False
    raise RuntimeError("simplex least squares did not converge")


def _check_resolvable(k: NDArray[np.float64]) -> None:
    gram = k.T @ k
    cond = np.linalg.cond(gram)
    if cond < GRAM_COND_MAX:
        return
    d = np.sqrt(np.diag(gram))
    corr = gram / np.outer(d, d)
    n = corr.shape[0]
    pairs = sorted(((corr[j, l], j, l) for j in range(n) for l in range(j + 1, n)), reverse=True)
    worst = [(j, l) for c, j, l in pairs if c > 0.5] or [(pairs[0][1], pairs[0][2])]
    raise NumericalPreconditionError(
        f"kernel Gram condition number {cond:.2e} exceeds {GRAM_COND_MAX:.0e}; colliding components {worst}"
    )


def estimate_populations(data: SampledDensity | Histogram, phi: ProbeWavefunction, G: float,
                         s: Sequence[float]) -> PopulationEstimate:
    """Least-squares populations from a gridded density or a histogram of outcomes.

    Histograms are fitted on bin probabilities, with each kernel integrated
    exactly over the bins.
    """
    if isinstance(data, Histogram):
        edges = np.asarray(data.bin_edges, dtype=float)
        total = float(np.sum(data.counts))
        if total <= 0:
            raise ValueError("histogram is empty")
        target = np.asarray(data.counts, dtype=float) / total
        k = np.stack([np.diff(phi.cdf(edges + G * sj)) for sj in s], axis=1)
    else:
        target = np.asarray(data.values, dtype=float)
        k = _kernels(phi, G, s, np.asarray(data.grid, dtype=float))
    _check_resolvable(k)
    p_unc = np.linalg.lstsq(k, target, rcond=None)[0]
    p_hat = simplex_least_squares(k, target)
    return PopulationEstimate(p_hat, float(np.linalg.norm(k @ p_hat - target)), p_unc)
