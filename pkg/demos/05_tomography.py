"""Reading pointer populations off the probe's position distribution.

Each pointer state displaces a Gaussian probe by a different amount. Fitting
the displaced kernels to the observed distribution recovers the populations,
first from the exact density and then from finite samples.
"""

import numpy as np

from qprobe import Histogram, ProbeWavefunction, estimate_populations, post_interaction_distribution, sample_outcomes

s, G = (0.0, 1.0, 2.0, 3.0), 1.0
p = np.array([0.1, 0.4, 0.2, 0.3])
phi = ProbeWavefunction.for_shifts(0.1, G, s)
f = post_interaction_distribution(phi, G, s, p)

est = estimate_populations(f, phi, G, s)
print(f"exact density : p_hat = {np.round(est.p_hat, 10)}")

lo, hi, _ = phi.grid
edges = np.linspace(lo, hi, 257)
for n_samples in (1_000, 10_000, 100_000):
    hist = Histogram.from_samples(sample_outcomes(f, n_samples, seed=3), edges)
    est = estimate_populations(hist, phi, G, s)
    print(f"{n_samples:>7} shots : p_hat = {np.round(est.p_hat, 4)}  max error {np.max(np.abs(est.p_hat - p)):.4f}")
