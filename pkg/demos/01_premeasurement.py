"""Premeasurement: the probe copies the system's pointer index.

Prepares |s_j>|A_0>, couples until G = hbar * 2pi/n, and prints which probe
pointer state each branch lands on. Then shows that a direct readout of the
probe cannot tell a superposition from the matching mixture.
"""

import numpy as np

from qprobe import ProbeSetup, QuantumState, attach_probe, expected_probe_value, premeasure, probe_marginal

n = 4
setup = ProbeSetup(n)
print(f"n = {n}, completion G = {setup.completion_G:.6f}")

for j in range(n):
    out = premeasure(setup, QuantumState.basis((n, n), (j, 0)), 1.0)
    k = int(np.argmax(np.abs(out.data) ** 2)) % n
    print(f"  |s_{j}>|A_0>  ->  |s_{j}>|A_{k}>")

c = np.array([0.5, 0.5j, -0.5, 0.5])
pure = QuantumState(c, (n,))
mixed = QuantumState(np.diag(np.abs(c) ** 2).astype(complex), (n,))
for label, sys in (("superposition", pure), ("mixture", mixed)):
    out = premeasure(setup, attach_probe(setup, sys), 1.0)
    print(f"{label:>13}: <A> = {expected_probe_value(setup, out):.12f}, "
          f"probe marginal = {np.round(probe_marginal(setup, out), 6)}")
