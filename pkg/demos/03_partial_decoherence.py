"""Sweeping the environment overlap from pure to fully decohered.

The environment states correlated with each pointer state have overlap
exp(-theta). The coherence indicator follows that overlap exactly for a
uniform superposition.
"""

import numpy as np

from qprobe import (
    ProbeSetup,
    born_rule_partial,
    coherence_indicator,
    expected_value_partial,
    lambda_interpolated,
    mixed_baseline,
    pure_prediction,
)

n = 4
setup = ProbeSetup(n)
c = np.full(n, 0.5, dtype=complex)
pure, base = pure_prediction(setup, c, 1.0), mixed_baseline(setup, 1.0)

print(" theta   closed form   simulated    indicator  exp(-theta)")
for theta in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 40.0):
    lam = lambda_interpolated(n, theta)
    v = expected_value_partial(setup, c, lam, 1.0)
    sim = born_rule_partial(setup, c, lam, 1.0)
    print(f"{theta:6.2f}  {v:11.8f}  {sim:11.8f}  {coherence_indicator(v, pure, base):9.6f}  {np.exp(-theta):9.6f}")
