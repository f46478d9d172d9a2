"""Eve's faked-states intercept-resend strategy and Bob's response to it.

Eve measures Alice's qubit in a random basis and resends the *opposite* bit in
the *opposite* basis.  In Bob's matching basis the faked state goes entirely to
the detector Eve did not read, so she picks a timing at which that detector is
nearly blind; in the other basis it splits 50/50.  The net effect is that Bob
mostly clicks only when his basis agrees with Eve's.

:func:`enumerate_table` is a brute-force enumeration of every branch of the
attack.  It deliberately shares no arithmetic with :mod:`faked_states.analytics`
so it can serve as an independent check of the closed-form expressions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import entr

from .analytics import AttackTiming, InfoReport
from .curves import DetectorPair
from .errors import InfeasibleError, NoArrivalsError

PHOTON_MODELS = ("single", "coherent", "fock")
EQUAL_RATE_TOL = 1e-3


class Basis(str, Enum):
    Z = "Z"
    X = "X"

    @property
    def opposite(self) -> Basis:
        return Basis.X if self is Basis.Z else Basis.Z

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class FakedState:
    """A pulse resent by Eve.

    ``brightness`` is the mean photon number; it is ignored by the
    ``"single"`` photon model, which describes exactly one photon.
    """

    basis: Basis
    bit: int
    timing: float
    brightness: float = 1.0

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        if self.brightness < 0:
            raise ValueError("brightness must be nonnegative")


def faked_state_for(eve_basis: Basis, eve_bit: int, timing: AttackTiming, brightness: float = 1.0) -> FakedState:
    """Faked state Eve sends after reading ``eve_bit`` in ``eve_basis``."""
    t = timing.t0 if eve_bit == 0 else timing.t1
    return FakedState(Basis(eve_basis).opposite, 1 - eve_bit, t, brightness)


def split_fractions(state_basis: Basis, state_bit: int, bob_basis: Basis) -> tuple[float, float]:
    """Fraction of the pulse energy reaching detectors 0 and 1."""
    if bob_basis == state_basis:
        return (1.0, 0.0) if state_bit == 0 else (0.0, 1.0)
    return 0.5, 0.5


def click_probability(mu: float, exposure: float, model: str = "coherent") -> float:
    """Probability that a detector fires given the effective exposure ``s * eta``."""
    if model == "single":
        return exposure
    if model == "coherent":
        return -math.expm1(-mu * exposure)
    if model == "fock":
        return 1.0 - (1.0 - exposure) ** mu
    raise ValueError(f"unknown photon model {model!r}")


def bob_click_probs(f: FakedState, bob_basis: Basis, pair: DetectorPair, model: str = "single") -> tuple[float, float]:
    """Click probabilities of Bob's detectors 0 and 1 for a faked state.

    In the ``"single"`` model the two clicks are mutually exclusive; in the
    ``"coherent"`` and ``"fock"`` models they are independent events.  Dark
    counts are not included.
    """
    s0, s1 = split_fractions(f.basis, f.bit, bob_basis)
    x0 = s0 * float(pair.curve0(f.timing))
    x1 = s1 * float(pair.curve1(f.timing))
    return click_probability(f.brightness, x0, model), click_probability(f.brightness, x1, model)


@dataclass(frozen=True)
class Outcome:
    """Bob's result distribution for one branch of the attack."""

    click0: float
    click1: float
    double: float
    lost: float

    def recorded(self, bit: int) -> float:
        """Probability Bob records ``bit``; double clicks are assigned at random."""
        return (self.click0 if bit == 0 else self.click1) + 0.5 * self.double


def _outcome(p0: float, p1: float, model: str) -> Outcome:
    if model == "single":
        return Outcome(p0, p1, 0.0, 1.0 - p0 - p1)
    return Outcome(p0 * (1 - p1), p1 * (1 - p0), p0 * p1, (1 - p0) * (1 - p1))


@dataclass(frozen=True)
class EnumerationResult:
    """Every branch of the attack, keyed by ``(alice, eve, bob_basis)``.

    ``alice`` and ``eve`` are ``(Basis, bit)`` pairs.  ``eve_prob`` gives the
    probability of Eve's reading given Alice's state; Alice's four states and
    Bob's two bases are equiprobable.
    """

    rows: dict
    eve_prob: dict
    p_arrive: float
    qber: float
    rate0: float
    rate1: float
    info: InfoReport


def _h(probabilities) -> float:
    p = np.fromiter(probabilities, dtype=float)
    return float(entr(p).sum() / math.log(2))


def _info_from_joint(joint: dict, p_arrive: float, qber: float) -> InfoReport:
    """Information report from the joint law ``P(a, e, b)`` of Z-basis sifted bits."""
    eve_keys = ("Z0", "Z1", "X0", "X1")
    total = sum(joint.values())
    p_ae = {(a, e): sum(joint[a, e, b] for b in (0, 1)) / total for a in (0, 1) for e in eve_keys}
    p_ab = {(a, b): sum(joint[a, e, b] for e in eve_keys) / total for a in (0, 1) for b in (0, 1)}
    p_a = {a: sum(p_ae[a, e] for e in eve_keys) for a in (0, 1)}
    p_e = {e: p_ae[0, e] + p_ae[1, e] for e in eve_keys}
    p_b = {b: p_ab[0, b] + p_ab[1, b] for b in (0, 1)}
    h_a = _h(p_a.values())
    h_ae = _h(p_ae.values())
    h_ab = _h(p_ab.values())
    return InfoReport(
        p_arrive=p_arrive,
        qber=qber,
        h_A=h_a,
        h_A_given_E=h_ae - _h(p_e.values()),
        i_AE=h_a + _h(p_e.values()) - h_ae,
        i_AB=h_a + _h(p_b.values()) - h_ab,
        p_a=p_a,
        p_e_given_a={a: {e: p_ae[a, e] / p_a[a] if p_a[a] else 0.25 for e in eve_keys} for a in (0, 1)},
        p_e=p_e,
        p_a_given_e={a: {e: p_ae[a, e] / p_e[e] if p_e[e] else 0.0 for e in eve_keys} for a in (0, 1)},
        p_b_given_a={a: {b: p_ab[a, b] / p_a[a] if p_a[a] else 0.5 for b in (0, 1)} for a in (0, 1)},
    )


def enumerate_table(
    pair: DetectorPair,
    timing: AttackTiming,
    mu0: float = 1.0,
    mu1: float = 1.0,
    model: str = "single",
) -> EnumerationResult:
    """Enumerate every combination of Alice's state, Eve's reading and Bob's basis.

    Eve reads Alice's bit when she picks Alice's basis and a fair coin
    otherwise.  ``mu0``/``mu1`` are the brightnesses of the pulses Eve sends
    at ``t0``/``t1`` (ignored by the ``"single"`` model).

    Raises:
        NoArrivalsError: if Bob never detects a sifted pulse.
    """
    rows, eve_prob = {}, {}
    joint = {}
    sifted = errors = 0.0
    rates = [0.0, 0.0]
    for a_basis, a_bit, e_basis in itertools.product(Basis, (0, 1), Basis):
        for e_bit in (0, 1):
            if e_basis == a_basis:
                p_eve = 1.0 if e_bit == a_bit else 0.0
            else:
                p_eve = 0.5
            alice, eve = (a_basis, a_bit), (e_basis, e_bit)
            eve_prob[alice, eve] = p_eve
            f = faked_state_for(e_basis, e_bit, timing, mu0 if e_bit == 0 else mu1)
            for bob_basis in Basis:
                out = _outcome(*bob_click_probs(f, bob_basis, pair, model), model)
                rows[alice, eve, bob_basis] = out
                if bob_basis != a_basis or p_eve == 0:
                    continue
                # Alice's state (1/4) times Eve's basis (1/2) times her reading
                w = 0.125 * p_eve
                for b in (0, 1):
                    rec = w * out.recorded(b)
                    sifted += rec
                    rates[b] += 0.5 * rec
                    if b != a_bit:
                        errors += rec
                    if a_basis == Basis.Z:
                        key = (a_bit, f"{e_basis}{e_bit}", b)
                        joint[key] = joint.get(key, 0.0) + rec
    if sifted <= 0:
        raise NoArrivalsError("no sifted detections")
    for a, e, b in itertools.product((0, 1), ("Z0", "Z1", "X0", "X1"), (0, 1)):
        joint.setdefault((a, e, b), 0.0)
    qber = errors / sifted
    return EnumerationResult(rows, eve_prob, sifted, qber, rates[0], rates[1], _info_from_joint(joint, sifted, qber))


@dataclass(frozen=True)
class EqualRateAttack:
    timing: AttackTiming
    mu0: float
    mu1: float
    qber: float
    rate0: float
    rate1: float


def _vectorized_rates(e00, e10, e01, e11, mu0, mu1, model):
    """Sifted per-pulse rates of bits 0/1 and of errors, broadcast over arrays."""
    eff = {(0, 0): e00, (1, 0): e10, (0, 1): e01, (1, 1): e11}  # (detector, timing)
    mu = {0: mu0, 1: mu1}
    r = [0.0, 0.0]
    err = 0.0
    for a_basis, a_bit, e_basis in itertools.product(Basis, (0, 1), Basis):
        for e_bit in (0, 1):
            p_eve = (1.0 if e_bit == a_bit else 0.0) if e_basis == a_basis else 0.5
            if p_eve == 0:
                continue
            s = split_fractions(e_basis.opposite, 1 - e_bit, a_basis)
            x0, x1 = s[0] * eff[0, e_bit], s[1] * eff[1, e_bit]
            if model == "single":
                rec0, rec1 = x0, x1
            else:
                if model == "coherent":
                    p0, p1 = -np.expm1(-mu[e_bit] * x0), -np.expm1(-mu[e_bit] * x1)
                else:
                    p0, p1 = 1 - (1 - x0) ** mu[e_bit], 1 - (1 - x1) ** mu[e_bit]
                rec0 = p0 * (1 - p1) + 0.5 * p0 * p1
                rec1 = p1 * (1 - p0) + 0.5 * p0 * p1
            w = 0.5 * 0.125 * p_eve  # Bob's basis matches Alice's with probability 1/2
            r[0] = r[0] + w * rec0
            r[1] = r[1] + w * rec1
            err = err + w * (rec1 if a_bit == 0 else rec0)
    return r[0], r[1], err


def optimize_equal_rates(
    pair: DetectorPair,
    t_grid: Sequence[float],
    mu_grid: Sequence[float],
    model: str = "coherent",
    rel_tol: float = EQUAL_RATE_TOL,
) -> EqualRateAttack:
    """Grid search for the lowest-QBER attack that keeps Bob's bit rates equal.

    Searches all ``(t0, t1, mu0, mu1)`` with times from ``t_grid`` and
    brightnesses from ``mu_grid`` subject to
    ``|rate0 - rate1| <= rel_tol * (rate0 + rate1)``, where ``rate_b`` is the
    per-pulse sifted rate of bit ``b``.  Ties go to the lexicographically
    smallest ``(t0, t1, mu0, mu1)``.  The ``"single"`` model requires
    ``mu_grid == [1]``.

    Raises:
        InfeasibleError: if no grid point satisfies the rate constraint; the
            message names the least-unbalanced candidate.
    """
    t = np.unique(np.asarray(t_grid, dtype=float))
    mus = np.unique(np.asarray(mu_grid, dtype=float))
    if t.size == 0 or mus.size == 0:
        raise ValueError("grids must be nonempty")
    if model == "single" and not np.array_equal(mus, [1.0]):
        raise ValueError("the single-photon model has no brightness; use mu_grid=[1]")
    if model not in PHOTON_MODELS:
        raise ValueError(f"unknown photon model {model!r}")
    eta0, eta1 = np.asarray(pair.curve0(t), dtype=float), np.asarray(pair.curve1(t), dtype=float)
    i0, i1, m0, m1 = np.meshgrid(np.arange(t.size), np.arange(t.size), mus, mus, indexing="ij")
    i0, i1, m0, m1 = (a.ravel() for a in (i0, i1, m0, m1))
    r0, r1, err = _vectorized_rates(eta0[i0], eta1[i0], eta0[i1], eta1[i1], m0, m1, model)
    total = r0 + r1
    with np.errstate(invalid="ignore", divide="ignore"):
        qber = np.where(total > 0, err / total, np.nan)
        imbalance = np.where(total > 0, np.abs(r0 - r1) / total, np.inf)
    feasible = (imbalance <= rel_tol) & np.isfinite(qber)
    if not feasible.any():
        k = int(np.argmin(imbalance))
        raise InfeasibleError(
            "no grid point equalises the detection rates; least unbalanced candidate "
            f"t0={t[i0[k]]:.9g} t1={t[i1[k]]:.9g} mu0={m0[k]:.9g} mu1={m1[k]:.9g} "
            f"relative imbalance={imbalance[k]:.3g} qber={qber[k]:.9g}"
        )
    k = int(np.argmin(np.where(feasible, qber, np.inf)))
    return EqualRateAttack(
        AttackTiming(float(t[i0[k]]), float(t[i1[k]])),
        float(m0[k]),
        float(m1[k]),
        float(qber[k]),
        float(r0[k]),
        float(r1[k]),
    )
