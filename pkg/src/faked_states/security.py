"""Worst-case security bound against an eavesdropper who controls detector efficiencies.

Bob measures a QBER through mismatched detectors; Eve can hide up to a factor
``eta`` of the errors, so the actual error rate ``delta`` that privacy
amplification must remove is larger than the measured one.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from scipy.optimize import bisect

from .analytics import AttackEfficiencies, binary_entropy, p_arrive, p_error, symmetric_threshold_qber
from .errors import InfeasibleError, NoArrivalsError


class Region(str, Enum):
    SECURE = "Secure"
    NOT_PROVEN = "NotProven"
    INSECURE = "Insecure"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SecurityAssessment:
    eta: float
    measured_qber: float
    delta: float
    rate: float
    region: Region


def pa_rate(delta: float) -> float:
    """Key fraction left after privacy amplification, ``1 - 2 h(delta)``."""
    return 1.0 - 2.0 * binary_entropy(delta)


@functools.lru_cache(maxsize=None)
def delta_star(xtol: float = 1e-12) -> float:
    """Zero of :func:`pa_rate` on ``(0, 1/2)``, the largest tolerable actual error rate."""
    return bisect(pa_rate, 1e-6, 0.5, xtol=xtol)


def worst_case_qber(delta: float, eta: float) -> float:
    """Smallest QBER Bob can observe when the actual error rate is ``delta``."""
    return eta * delta / (1.0 + eta * delta - delta)


# conventional rounded value of delta_star used by the linear rule of thumb
ROUNDED_DELTA_STAR = 0.11


def approx_qber_budget(eta: float) -> float:
    """Rule-of-thumb tolerable QBER, ``0.11 * eta``."""
    return ROUNDED_DELTA_STAR * eta


def exact_qber_budget(eta: float) -> float:
    """Largest measured QBER for which ``delta`` stays below ``delta_star``."""
    return worst_case_qber(delta_star(), eta)


def actual_delta(measured_qber: float, eta: float) -> float:
    """Actual bit error rate implied by a measured QBER and mismatch ``eta``.

    Raises:
        InfeasibleError: at ``eta = 0`` with zero QBER, where any ``delta``
            is consistent with the observation.
    """
    denominator = eta + (1.0 - eta) * measured_qber
    if denominator == 0:
        raise InfeasibleError("bound undefined at total mismatch with zero QBER")
    return measured_qber / denominator


def classify(eta: float, measured_qber: float) -> SecurityAssessment:
    """Place ``(eta, measured_qber)`` on the security chart.

    The QBER is taken without the dark-count contribution.  ``Insecure`` means
    the intercept-resend attack on symmetric curves already reproduces the
    observed QBER; ``Secure`` means the corrected error rate is below
    ``delta_star``.  Boundary points go to the more pessimistic region.
    """
    if not 0.0 <= eta <= 1.0 or not 0.0 <= measured_qber <= 1.0:
        raise ValueError("eta and measured_qber must lie in [0, 1]")
    try:
        delta = actual_delta(measured_qber, eta)
        rate = pa_rate(min(delta, 0.5))
    except InfeasibleError:
        delta = rate = float("nan")
    if measured_qber >= symmetric_threshold_qber(eta):
        region = Region.INSECURE
    elif delta < delta_star():
        region = Region.SECURE
    else:
        region = Region.NOT_PROVEN
    return SecurityAssessment(eta, measured_qber, delta, rate, region)


def mixture_qber(components: Iterable[tuple[float, AttackEfficiencies]]) -> float:
    """QBER when Eve spreads her pulses over several timing pairs.

    Errors and arrivals are pooled over the components before dividing.
    """
    components = list(components)
    if not components:
        raise ValueError("empty mixture")
    weights = [w for w, _ in components]
    if any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("weights must be positive and sum to 1")
    errors = sum(w * p_error(e) for w, e in components)
    arrivals = sum(w * p_arrive(e) for w, e in components)
    if arrivals <= 0:
        raise NoArrivalsError("no arrivals in the pooled mixture")
    return errors / arrivals
