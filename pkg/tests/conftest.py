import numpy as np
import pytest

from faked_states.analytics import AttackEfficiencies, AttackTiming
from faked_states.curves import DetectorPair, GateCurve, TabulatedCurve

T0_T1 = AttackTiming(0.0, 1.0)


def pair_from_efficiencies(e: AttackEfficiencies, dark0=0.0, dark1=0.0) -> DetectorPair:
    """Two-sample curves that take exactly the four attack efficiencies at t=0 and t=1."""
    return DetectorPair(
        TabulatedCurve([0.0, 1.0], [e.e00, e.e01]),
        TabulatedCurve([0.0, 1.0], [e.e10, e.e11]),
        dark0,
        dark1,
    )


def random_efficiencies(rng, n, low=0.0):
    for row in rng.uniform(low, 1.0, size=(n, 4)):
        yield AttackEfficiencies(*row)


@pytest.fixture
def rng():
    return np.random.default_rng(20070419)


@pytest.fixture
def shifted_gates():
    """Identical logistic gates, detector 1 delayed by 0.5 ns."""
    return DetectorPair(GateCurve(0.0, 2.0, 0.05, 0.1), GateCurve(0.5, 2.0, 0.05, 0.1))


# One PASS/FAIL line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
