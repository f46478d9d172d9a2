"""
Where is a mismatched system provably secure?
=============================================

The measured QBER underestimates the error rate that privacy amplification
must remove.  Correct for it and sort (eta, QBER) points into three regions.
"""

import numpy as np

from faked_states import approx_qber_budget, classify, delta_star, exact_qber_budget

print(f"privacy amplification stops working at delta* = {delta_star():.7f}\n")

etas = np.array([0.02, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0])
qbers = np.array([0.0025, 0.005, 0.01, 0.02, 0.05, 0.1])
symbol = {"Secure": "S", "NotProven": ".", "Insecure": "X"}

print("qber\\eta " + "".join(f"{e:>6.2f}" for e in etas))
for q in qbers[::-1]:
    print(f"{q:8.4f} " + "".join(f"{symbol[classify(e, q).region.value]:>6}" for e in etas))
print("\nS secure, . not proven, X attack reproduces the QBER")

# budgets for a badly mismatched pair
for eta in (1 / 30, 0.1, 0.5):
    print(f"eta={eta:.4f}: QBER budget {exact_qber_budget(eta):.6f} (rule of thumb {approx_qber_budget(eta):.6f})")
