"""Detector-efficiency-mismatch (time-shift) faked-states attack on BB84.

Submodules:

* :mod:`~faked_states.curves`: detector efficiency curves, mismatch, jitter.
* :mod:`~faked_states.analytics`: closed-form attack statistics.
* :mod:`~faked_states.attack`: faked states, brute-force enumeration, equal-rate optimiser.
* :mod:`~faked_states.security`: worst-case bound and security chart.
* :mod:`~faked_states.montecarlo`: pulse-level simulator.
* :mod:`~faked_states.qnd`: nondemolition timing measurement on time-bin qubits.
"""

from .analytics import (
    AttackEfficiencies,
    AttackTiming,
    InfoReport,
    attack_efficiencies,
    binary_entropy,
    info_report,
    p_arrive,
    p_arrive_given_Z0,
    qber_attack,
    symmetric_curve_point,
)
from .attack import Basis, FakedState, bob_click_probs, enumerate_table, faked_state_for, optimize_equal_rates
from .curves import (
    DetectorPair,
    GateCurve,
    JitterDistribution,
    TabulatedCurve,
    eta_vs_shift,
    from_samples,
    jitter_smear,
    mismatch_eta,
    read_curve_file,
)
from .montecarlo import SimConfig, SimStats, brightness_to_match_rate, run
from .security import (
    Region,
    actual_delta,
    approx_qber_budget,
    classify,
    delta_star,
    exact_qber_budget,
    mixture_qber,
    pa_rate,
    worst_case_qber,
)

__version__ = "0.1.0"
