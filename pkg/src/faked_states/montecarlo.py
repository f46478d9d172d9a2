"""Pulse-level Monte Carlo simulation of BB84 with and without the faked-states attack.

Random numbers come from a counter-based generator (Philox) keyed by the seed,
with the counter set from a fixed-size block index.  A block always sees the
same random stream whichever worker runs it, so results do not depend on the
number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.optimize import brentq

from .analytics import AttackTiming
from .curves import DetectorPair
from .errors import ConfigError, InfeasibleError

BLOCK_SIZE = 1 << 16
DOUBLE_CLICK_POLICIES = ("random_assign", "discard")
OUTCOMES = ("none", "0", "1", "double")

# rows of the per-block uniform table
(_A_BASIS, _A_BIT, _E_BASIS, _E_COIN, _B_BASIS, _PRESENT,
 _CLICK0, _CLICK1, _DARK0, _DARK1, _ASSIGN) = range(11)
_N_STREAMS = 11


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters.

    ``alice_mu=None`` means Alice emits exactly one photon; otherwise her
    pulses are coherent with that mean photon number.  ``mu_t0``/``mu_t1``
    set the brightness of Eve's faked states at each timing (``None`` for
    single photons).  Eve's resend unit sits at Bob, so channel loss only
    applies to Alice's undisturbed pulses.
    """

    n_pulses: int
    seed: int
    pair: DetectorPair
    channel_transmittance: float = 1.0
    alice_mu: float | None = None
    attack: AttackTiming | None = None
    mu_t0: float | None = None
    mu_t1: float | None = None
    nominal_arrival_time: float = 0.0
    double_click_policy: str = "random_assign"

    def __post_init__(self):
        if self.n_pulses <= 0:
            raise ConfigError("n_pulses must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not 0.0 < self.channel_transmittance <= 1.0:
            raise ConfigError("channel_transmittance must lie in (0, 1]")
        for name in ("alice_mu", "mu_t0", "mu_t1"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.double_click_policy not in DOUBLE_CLICK_POLICIES:
            raise ConfigError(f"double_click_policy must be one of {DOUBLE_CLICK_POLICIES}")


@dataclass
class SimStats:
    """Counts accumulated over simulated pulses.

    ``basis_matched`` counts pulses where Alice's and Bob's bases agree,
    ``sifted`` those that Bob also detected, and ``kept`` those that survive
    the double-click policy.  ``eve_agree`` (attack runs only) counts kept
    bits where Eve's measured bit equals Alice's.
    """

    sent: int = 0
    basis_matched: int = 0
    sifted: int = 0
    kept: int = 0
    errors: int = 0
    kept0: int = 0
    kept1: int = 0
    clicks0: int = 0
    clicks1: int = 0
    double_clicks: int = 0
    coincidences: dict = field(default_factory=lambda: {f"{b},{o}": 0 for b in "ZX" for o in OUTCOMES})
    eve_agree: int | None = None

    def __add__(self, other: SimStats) -> SimStats:
        out = SimStats()
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if f.name == "coincidences":
                setattr(out, f.name, {k: a[k] + b[k] for k in a})
            elif f.name == "eve_agree":
                setattr(out, f.name, None if a is None and b is None else (a or 0) + (b or 0))
            else:
                setattr(out, f.name, a + b)
        return out

    @property
    def qber(self) -> float:
        return self.errors / self.kept if self.kept else float("nan")

    @property
    def qber_stderr(self) -> float:
        """Binomial standard error of :attr:`qber`."""
        q = self.qber
        return math.sqrt(q * (1 - q) / self.kept) if self.kept else float("nan")

    @property
    def p_arrive(self) -> float:
        """Fraction of basis-matched pulses that Bob detected."""
        return self.sifted / self.basis_matched if self.basis_matched else float("nan")

    @property
    def sifted_rate(self) -> float:
        return self.sifted / self.sent if self.sent else float("nan")

    @property
    def eve_agreement(self) -> float | None:
        if self.eve_agree is None:
            return None
        return self.eve_agree / self.kept if self.kept else float("nan")

    @property
    def bob_agreement(self) -> float:
        return 1.0 - self.qber

    def to_dict(self) -> dict:
        return {
            "sent": self.sent,
            "basis_matched": self.basis_matched,
            "sifted": self.sifted,
            "kept": self.kept,
            "errors": self.errors,
            "kept0": self.kept0,
            "kept1": self.kept1,
            "clicks0": self.clicks0,
            "clicks1": self.clicks1,
            "double_clicks": self.double_clicks,
            "coincidences": dict(self.coincidences),
            "qber": self.qber,
            "qber_stderr": self.qber_stderr,
            "p_arrive": self.p_arrive,
            "sifted_rate": self.sifted_rate,
            "click_rate0": self.clicks0 / self.sent,
            "click_rate1": self.clicks1 / self.sent,
            "eve_agreement": self.eve_agreement,
        }


def _block_uniforms(seed: int, block: int, n: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, block, 0]))
    return gen.random((_N_STREAMS, n))


def _clicks(u0, u1, present, x0, x1, mu):
    """Detector firings without dark counts; ``mu`` is NaN for single photons."""
    single = np.isnan(mu)
    c0_single = u0 < x0
    c1_single = (u0 >= x0) & (u0 < x0 + x1)
    m = np.where(single, 0.0, mu)
    c0_coh = u0 < -np.expm1(-m * x0)
    c1_coh = u1 < -np.expm1(-m * x1)
    c0 = present & np.where(single, c0_single, c0_coh)
    c1 = present & np.where(single, c1_single, c1_coh)
    return c0, c1


def _simulate_block(config: SimConfig, block: int) -> SimStats:
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, config.n_pulses - start)
    u = _block_uniforms(config.seed, block, n)
    pair = config.pair
    nan = float("nan")

    a_basis = u[_A_BASIS] < 0.5  # True = X
    a_bit = u[_A_BIT] < 0.5
    b_basis = u[_B_BASIS] < 0.5

    if config.attack is None:
        state_basis, state_bit = a_basis, a_bit
        t = config.nominal_arrival_time
        eta0 = np.full(n, float(pair.curve0(t)))
        eta1 = np.full(n, float(pair.curve1(t)))
        if config.alice_mu is None:
            present = u[_PRESENT] < config.channel_transmittance
            mu = np.full(n, nan)
        else:
            present = np.ones(n, dtype=bool)
            mu = np.full(n, config.alice_mu * config.channel_transmittance)
        e_bit = None
    else:
        timing = config.attack
        if config.alice_mu is None:
            present = np.ones(n, dtype=bool)
        else:
            present = u[_PRESENT] < -math.expm1(-config.alice_mu)
        e_basis = u[_E_BASIS] < 0.5
        e_bit = np.where(e_basis == a_basis, a_bit, u[_E_COIN] < 0.5)
        state_basis, state_bit = ~e_basis, ~e_bit
        eta0 = np.where(e_bit, float(pair.curve0(timing.t1)), float(pair.curve0(timing.t0)))
        eta1 = np.where(e_bit, float(pair.curve1(timing.t1)), float(pair.curve1(timing.t0)))
        mu0 = nan if config.mu_t0 is None else config.mu_t0
        mu1 = nan if config.mu_t1 is None else config.mu_t1
        mu = np.where(e_bit, mu1, mu0)

    same = b_basis == state_basis
    s0 = np.where(same, np.where(state_bit, 0.0, 1.0), 0.5)
    s1 = np.where(same, np.where(state_bit, 1.0, 0.0), 0.5)
    c0, c1 = _clicks(u[_CLICK0], u[_CLICK1], present, s0 * eta0, s1 * eta1, mu)
    c0 |= u[_DARK0] < pair.dark0
    c1 |= u[_DARK1] < pair.dark1

    double = c0 & c1
    detected = c0 | c1
    if config.double_click_policy == "random_assign":
        bit = np.where(double, u[_ASSIGN] < 0.5, c1)
        recorded = detected
    else:
        bit = c1
        recorded = detected & ~double

    match = a_basis == b_basis
    kept = match & recorded
    stats = SimStats(
        sent=n,
        basis_matched=int(match.sum()),
        sifted=int((match & detected).sum()),
        kept=int(kept.sum()),
        errors=int((kept & (bit != a_bit)).sum()),
        kept0=int((kept & ~bit).sum()),
        kept1=int((kept & bit).sum()),
        clicks0=int(c0.sum()),
        clicks1=int(c1.sum()),
        double_clicks=int(double.sum()),
    )
    outcome = np.select([double, c0, c1], [3, 1, 2], default=0)
    for basis_name, in_x in (("Z", False), ("X", True)):
        counts = np.bincount(outcome[b_basis == in_x], minlength=4)
        for k, name in enumerate(OUTCOMES):
            stats.coincidences[f"{basis_name},{name}"] = int(counts[k])
    if e_bit is not None:
        stats.eve_agree = int((kept & (e_bit == a_bit)).sum())
    return stats


def run(config: SimConfig, workers: int = 1) -> SimStats:
    """Simulate ``config.n_pulses`` pulses and return the accumulated counts.

    ``workers`` threads process fixed-size blocks; the result is identical for
    any worker count.
    """
    n_blocks = -(-config.n_pulses // BLOCK_SIZE)
    if workers <= 1:
        parts = [_simulate_block(config, b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _simulate_block(config, b), range(n_blocks)))
    total = SimStats(eve_agree=None if config.attack is None else 0)
    for part in parts:
        total = total + part
    return total


# -- analytic detection rates ------------------------------------------------


def _p_detect(x0: float, x1: float, mu: float | None, dark0: float, dark1: float) -> float:
    """Probability that at least one detector fires."""
    if mu is None:
        p_silent = 1.0 - x0 - x1
    else:
        p_silent = math.exp(-mu * (x0 + x1))
    return 1.0 - p_silent * (1.0 - dark0) * (1.0 - dark1)


def timing_sifted_rate(config: SimConfig, eve_bit: int, mu: float | None) -> float:
    """Per-pulse sifted detection rate for pulses Eve sends at ``t_{eve_bit}``.

    Conditioned on Eve having read ``eve_bit``; ``mu=None`` means a single photon.
    """
    if config.attack is None:
        raise ConfigError("timing rates need an attack configuration")
    pair = config.pair
    t = config.attack.t0 if eve_bit == 0 else config.attack.t1
    eta = (float(pair.curve0(t)), float(pair.curve1(t)))
    q = 1.0 if config.alice_mu is None else -math.expm1(-config.alice_mu)
    p_dark = 1.0 - (1.0 - pair.dark0) * (1.0 - pair.dark1)
    rate = 0.0
    for a_basis in (0, 1):
        for a_bit in (0, 1):
            for e_basis in (0, 1):
                p = (1.0 if a_bit == eve_bit else 0.0) if e_basis == a_basis else 0.5
                if p == 0:
                    continue
                # P(alice state, eve basis | eve bit) = (1/8) p / (1/2)
                w = 0.25 * p
                if a_basis == 1 - e_basis:  # Bob's (matching) basis equals the faked basis
                    s = (1.0, 0.0) if eve_bit == 1 else (0.0, 1.0)
                else:
                    s = (0.5, 0.5)
                p_det = _p_detect(s[0] * eta[0], s[1] * eta[1], mu, pair.dark0, pair.dark1)
                rate += w * (q * p_det + (1 - q) * p_dark)
    return 0.5 * rate


def attacked_sifted_rate(config: SimConfig, mu_t0: float | None, mu_t1: float | None) -> float:
    """Per-pulse sifted detection rate under the attack."""
    return 0.5 * (timing_sifted_rate(config, 0, mu_t0) + timing_sifted_rate(config, 1, mu_t1))


def no_attack_sifted_rate(config: SimConfig) -> float:
    """Per-pulse sifted detection rate without Eve."""
    pair = config.pair
    t = config.nominal_arrival_time
    eta = (float(pair.curve0(t)), float(pair.curve1(t)))
    rate = 0.0
    for bit in (0, 1):
        x = eta[bit] * config.channel_transmittance
        x0, x1 = (x, 0.0) if bit == 0 else (0.0, x)
        rate += 0.5 * _p_detect(x0, x1, config.alice_mu, pair.dark0, pair.dark1)
    return 0.5 * rate


def brightness_to_match_rate(config: SimConfig, target_rate: float, mu_max: float = 1e4) -> tuple[float, float]:
    """Coherent brightness per timing giving Bob a sifted rate of ``target_rate``.

    Each timing is tuned separately, so Bob's rates for pulses Eve sends at
    ``t0`` and at ``t1`` both equal the target and the bit rates stay balanced.

    Raises:
        InfeasibleError: if a timing cannot reach the target for any
            brightness up to ``mu_max``; the message gives the reachable range.
    """
    result = []
    for eve_bit in (0, 1):

        def gap(mu):
            return timing_sifted_rate(config, eve_bit, mu) - target_rate

        lo, hi = gap(0.0), gap(mu_max)
        if lo > 0 or hi < 0:
            raise InfeasibleError(
                f"target rate {target_rate:.9g} unachievable at t{eve_bit}: "
                f"reachable range [{lo + target_rate:.9g}, {hi + target_rate:.9g}]"
            )
        result.append(brentq(gap, 0.0, mu_max, xtol=1e-14, rtol=1e-14, maxiter=500))
    return result[0], result[1]
