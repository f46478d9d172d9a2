"""
Pulse-by-pulse simulation against the closed forms
==================================================

Send a million pulses through the attack and compare counts with the
analytic QBER and arrival probability.  Then make Eve brighten her pulses
so Bob sees the same detection rate as without her.
"""

from faked_states import AttackEfficiencies, AttackTiming, DetectorPair, TabulatedCurve, p_arrive, qber_attack
from faked_states.montecarlo import (
    SimConfig,
    attacked_sifted_rate,
    brightness_to_match_rate,
    no_attack_sifted_rate,
    run,
)

e = AttackEfficiencies(0.9, 0.2, 0.15, 0.8)
# two-sample curves reproducing e at t=0 (Eve read 0) and t=1 (Eve read 1)
pair = DetectorPair(TabulatedCurve([0, 1], [e.e00, e.e01]), TabulatedCurve([0, 1], [e.e10, e.e11]))
timing = AttackTiming(0.0, 1.0)

stats = run(SimConfig(1_000_000, seed=1, pair=pair, attack=timing), workers=4)
print(f"QBER      simulated {stats.qber:.5f} +- {stats.qber_stderr:.5f}, closed form {qber_attack(e):.5f}")
print(f"P(arrive) simulated {stats.p_arrive:.5f},            closed form {p_arrive(e):.5f}")
print(f"Eve agrees with Alice on {stats.eve_agreement:.4f} of kept bits, Bob on {stats.bob_agreement:.4f}")

base = SimConfig(1_000_000, seed=2, pair=pair, attack=timing, nominal_arrival_time=0.5)
target = no_attack_sifted_rate(base)
mu0, mu1 = brightness_to_match_rate(base, target)
print(f"\nrate without Eve {target:.5f}; single-photon attack gives {attacked_sifted_rate(base, None, None):.5f}")
print(f"coherent faked states need mu(t0) = {mu0:.3f}, mu(t1) = {mu1:.3f}")
bright = run(SimConfig(1_000_000, seed=2, pair=pair, attack=timing, mu_t0=mu0, mu_t1=mu1))
print(f"simulated rate {bright.sifted_rate:.5f}, QBER {bright.qber:.4f}, double clicks {bright.double_clicks}")
