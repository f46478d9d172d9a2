"""
Faked states on symmetric detectors
===================================

Eve resends her result at the timing where the *other* detector is blind.
With symmetric curves the blinded detector keeps a fraction ``eta`` of its
efficiency.  Walk eta from 0 to 1 and watch the QBER and both informations.
"""

import numpy as np
from scipy.optimize import brentq

from faked_states import symmetric_curve_point

etas = np.linspace(0, 1, 11)
print(f"{'eta':>5} {'qber':>8} {'I(A:B)':>8} {'I(A:E)':>8}")
for eta in etas:
    q, i_ab, i_ae = symmetric_curve_point(eta)
    print(f"{eta:5.2f} {q:8.4f} {i_ab:8.4f} {i_ae:8.4f}")

# Eve's information always beats Bob's.  The gap peaks where QBER = 1/3.
fine = np.linspace(1e-4, 1, 10001)
gap = np.array([symmetric_curve_point(x)[2] - symmetric_curve_point(x)[1] for x in fine])
print(f"\nlargest gap {gap.max():.6f} at eta = {fine[gap.argmax()]:.4f}")

# Standard BB84 tolerates 11% QBER; which eta already reaches it?
eta_11 = brentq(lambda x: symmetric_curve_point(x)[0] - 0.11, 1e-9, 1)
print(f"QBER reaches 0.11 at eta = {eta_11:.6f}")
