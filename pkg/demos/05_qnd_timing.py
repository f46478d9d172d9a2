"""
Measuring arrival time without touching the qubit
=================================================

A photon split over two pulses carries its qubit in the relative phase.
Projecting onto a time interval *and* its copy one pulse-separation later
narrows both pulses together, so the phase survives.
"""

import numpy as np

from faked_states.qnd import TimeGrid, make_qubit_state, project_timing, recovered_phase, rms_duration, timing_distribution

tau, bandwidth = 1.0, 40.0
grid = TimeGrid.covering(tau, 1000)
state = make_qubit_state(270, 0.5, grid, omega0=100.0, delta=bandwidth)
print(f"pulse rms duration {rms_duration(state) * 1e3:.2f} ps (1/(2 delta) = {1e3 / (2 * bandwidth):.2f} ps)")

res = 0.01
probs = timing_distribution(state, res)
print(f"{len(probs)} intervals of {res * 1e3:.0f} ps, total probability {probs.sum():.12f}")

rng = np.random.default_rng(0)
for _ in range(3):
    i = rng.choice(len(probs), p=probs / probs.sum())
    p, after = project_timing(state, int(i), res)
    print(f"  outcome {i}: p = {p:.4f}, width {rms_duration(after) * 1e3:.2f} ps, phase {recovered_phase(after):.6f} deg")
