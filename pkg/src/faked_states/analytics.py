"""Closed-form statistics of the faked-states intercept-resend attack.

Eve measures each of Alice's qubits in a random basis and resends the
opposite bit in the opposite basis, timed at ``t0`` after reading 0 and at
``t1`` after reading 1.  Everything Bob sees then depends on four numbers:

    e00 = eta0(t0), e10 = eta1(t0), e01 = eta0(t1), e11 = eta1(t1)

collected in :class:`AttackEfficiencies`.  All entropies are in bits with
``0 log 0 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import DetectorPair
from .errors import NoArrivalsError


@dataclass(frozen=True)
class AttackTiming:
    """Eve's two resend times (ns): ``t0`` favours detector 0, ``t1`` detector 1."""

    t0: float
    t1: float


@dataclass(frozen=True)
class AttackEfficiencies:
    e00: float
    e10: float
    e01: float
    e11: float

    def __post_init__(self):
        for name in ("e00", "e10", "e01", "e11"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @classmethod
    def symmetric(cls, eta: float) -> AttackEfficiencies:
        """Symmetric curves normalised to a unit favoured efficiency: ``(1, eta, eta, 1)``."""
        return cls(1.0, eta, eta, 1.0)


@dataclass(frozen=True)
class InfoReport:
    """Attack statistics for a Z-basis sifted bit.

    Probability tables are nested dicts keyed by Alice's bit ``a`` (0/1),
    Eve's record ``e`` (``"Z0"``, ``"Z1"``, ``"X0"``, ``"X1"``) and Bob's bit
    ``b`` (0/1); e.g. ``p_e_given_a[a][e]``.
    """

    p_arrive: float
    qber: float
    h_A: float
    h_A_given_E: float
    i_AE: float
    i_AB: float
    p_a: dict
    p_e_given_a: dict
    p_e: dict
    p_a_given_e: dict
    p_b_given_a: dict


EVE_OUTCOMES = ("Z0", "Z1", "X0", "X1")


def attack_efficiencies(pair: DetectorPair, timing: AttackTiming) -> AttackEfficiencies:
    """Evaluate both curves at both attack timings."""
    return AttackEfficiencies(
        float(pair.curve0(timing.t0)),
        float(pair.curve1(timing.t0)),
        float(pair.curve0(timing.t1)),
        float(pair.curve1(timing.t1)),
    )


def binary_entropy(x):
    """Binary Shannon entropy in bits; works elementwise on arrays."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("binary_entropy argument must lie in [0, 1]")
    inner = (x > 0) & (x < 1)
    safe = np.where(inner, x, 0.5)
    h = np.where(inner, -safe * np.log2(safe) - (1 - safe) * np.log2(1 - safe), 0.0)
    return float(h) if h.ndim == 0 else h


def p_arrive_given_Z0(e: AttackEfficiencies) -> float:
    """Sifted detection probability when Alice sends Z0."""
    return (e.e00 + e.e01 + 2 * e.e10) / 4


def p_arrive(e: AttackEfficiencies) -> float:
    """Sifted detection probability averaged over Alice's four states."""
    return (e.e00 + 3 * e.e01 + 3 * e.e10 + e.e11) / 8


def p_error(e: AttackEfficiencies) -> float:
    """Probability that a sifted pulse is detected with the wrong bit."""
    return (2 * e.e01 + 2 * e.e10) / 8


def qber_attack(e: AttackEfficiencies) -> float:
    """Bob's QBER under the attack.

    Raises:
        NoArrivalsError: if no photon ever reaches Bob's detectors.
    """
    denominator = e.e00 + 3 * e.e01 + 3 * e.e10 + e.e11
    if denominator <= 0:
        raise NoArrivalsError("no arrivals: all attack efficiencies vanish")
    return (2 * e.e01 + 2 * e.e10) / denominator


def _entropy(probabilities) -> float:
    return -sum(p * math.log2(p) for p in probabilities if p > 0)


def info_report(e: AttackEfficiencies) -> InfoReport:
    """Full information balance between Alice, Eve and Bob.

    ``P(E|A=1)`` follows from the ``A=0`` expressions by exchanging the bit
    labels together with ``e00 <-> e11`` and ``e01 <-> e10``.
    """
    qber = qber_attack(e)
    total = e.e00 + 3 * e.e01 + 3 * e.e10 + e.e11
    d0 = e.e00 + e.e01 + 2 * e.e10
    d1 = e.e11 + e.e10 + 2 * e.e01

    p_a = {0: d0 / total, 1: 1 - d0 / total}
    p_e_given_a = {
        0: {"Z0": (e.e00 + e.e10) / d0, "Z1": 0.0, "X0": e.e10 / d0, "X1": e.e01 / d0} if d0 > 0 else None,
        1: {"Z0": 0.0, "Z1": (e.e11 + e.e01) / d1, "X0": e.e10 / d1, "X1": e.e01 / d1} if d1 > 0 else None,
    }
    # a bit that never arrives carries no conditional distribution
    for a in (0, 1):
        if p_e_given_a[a] is None:
            p_e_given_a[a] = dict.fromkeys(EVE_OUTCOMES, 0.25)

    p_e = {k: sum(p_e_given_a[a][k] * p_a[a] for a in (0, 1)) for k in EVE_OUTCOMES}
    p_a_given_e = {
        a: {k: (p_a[a] * p_e_given_a[a][k] / p_e[k] if p_e[k] > 0 else 0.0) for k in EVE_OUTCOMES}
        for a in (0, 1)
    }
    h_a_given_e = -sum(
        p_a[a] * p_e_given_a[a][k] * math.log2(p_a_given_e[a][k])
        for a in (0, 1)
        for k in EVE_OUTCOMES
        if p_a[a] * p_e_given_a[a][k] > 0
    )

    b00 = (e.e00 + e.e01) / d0 if d0 > 0 else 0.5
    b11 = (e.e11 + e.e10) / d1 if d1 > 0 else 0.5
    p_b_given_a = {0: {0: b00, 1: 1 - b00}, 1: {0: 1 - b11, 1: b11}}
    p_b = {b: sum(p_a[a] * p_b_given_a[a][b] for a in (0, 1)) for b in (0, 1)}
    h_a_given_b = -sum(
        p_a[a] * p_b_given_a[a][b] * math.log2(p_a[a] * p_b_given_a[a][b] / p_b[b])
        for a in (0, 1)
        for b in (0, 1)
        if p_a[a] * p_b_given_a[a][b] > 0
    )

    h_a = _entropy(p_a.values())
    return InfoReport(
        p_arrive=p_arrive(e),
        qber=qber,
        h_A=h_a,
        h_A_given_E=h_a_given_e,
        i_AE=h_a - h_a_given_e,
        i_AB=h_a - h_a_given_b,
        p_a=p_a,
        p_e_given_a=p_e_given_a,
        p_e=p_e,
        p_a_given_e=p_a_given_e,
        p_b_given_a=p_b_given_a,
    )


def symmetric_threshold_qber(eta):
    """QBER of the attack on symmetric curves with normalised efficiency ``eta``."""
    eta = np.asarray(eta, dtype=float)
    out = 2 * eta / (1 + 3 * eta)
    return float(out) if out.ndim == 0 else out


def symmetric_curve_point(eta: float) -> tuple[float, float, float]:
    """``(qber, i_AB, i_AE)`` for symmetric curves.

    With ``eta0(t0) = eta1(t1)`` and ``eta0(t1) = eta1(t0)`` everything
    depends on ``eta = eta1(t0)/eta0(t0)`` only.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    qber = symmetric_threshold_qber(eta)
    return qber, 1.0 - binary_entropy(qber), 1.0 - qber
