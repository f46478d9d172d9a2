import math

import numpy as np
import pytest

from faked_states.analytics import (
    AttackEfficiencies,
    AttackTiming,
    attack_efficiencies,
    binary_entropy,
    info_report,
    p_arrive,
    p_arrive_given_Z0,
    qber_attack,
    symmetric_curve_point,
)
from faked_states.curves import DetectorPair, GateCurve, TabulatedCurve
from faked_states.errors import NoArrivalsError

from conftest import random_efficiencies

E_SMALL = AttackEfficiencies(0.1, 0.01, 0.01, 0.1)
UNIT = AttackEfficiencies(1, 1, 1, 1)
TOTAL = AttackEfficiencies(1, 0, 0, 1)


def h_direct(x):
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def test_attack_efficiencies_constant():
    c = TabulatedCurve([-5, 5], [0.1, 0.1])
    e = attack_efficiencies(DetectorPair(c, c), AttackTiming(-1, 1))
    assert (e.e00, e.e10, e.e01, e.e11) == pytest.approx((0.1, 0.1, 0.1, 0.1))


def test_attack_efficiencies_blind_zones():
    pair = DetectorPair(TabulatedCurve([0, 1, 1.01, 3], [0.1, 0.1, 0, 0]), TabulatedCurve([0, 1.99, 2, 3], [0, 0, 0.1, 0.1]))
    e = attack_efficiencies(pair, AttackTiming(0.5, 2.5))
    assert (e.e00, e.e10, e.e01, e.e11) == (0.1, 0.0, 0.0, 0.1)


def test_attack_efficiencies_match_curve_eval(shifted_gates):
    timing = AttackTiming(-1.2, 1.7)
    e = attack_efficiencies(shifted_gates, timing)
    assert e.e00 == shifted_gates.curve0(-1.2)
    assert e.e10 == shifted_gates.curve1(-1.2)
    assert e.e01 == shifted_gates.curve0(1.7)
    assert e.e11 == shifted_gates.curve1(1.7)


@pytest.mark.parametrize(
    "e, expected",
    [(UNIT, 1.0), (E_SMALL, (0.1 + 0.01 + 0.02) / 4), (TOTAL, 0.25)],
)
def test_p_arrive_given_Z0(e, expected):
    assert p_arrive_given_Z0(e) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("e, expected", [(UNIT, 1.0), (E_SMALL, 0.0325), (TOTAL, 0.25)])
def test_p_arrive(e, expected):
    assert p_arrive(e) == pytest.approx(expected, abs=1e-15)


def test_qber_values():
    assert qber_attack(TOTAL) == 0.0
    assert qber_attack(AttackEfficiencies.symmetric(1 / 3)) == pytest.approx(1 / 3, abs=1e-15)
    assert qber_attack(E_SMALL) == pytest.approx(0.04 / 0.26, abs=1e-15)
    assert qber_attack(E_SMALL) == pytest.approx(0.153846, abs=1e-6)


def test_qber_no_arrivals():
    with pytest.raises(NoArrivalsError):
        qber_attack(AttackEfficiencies(0, 0, 0, 0))


def test_info_report_symmetric_third():
    r = info_report(AttackEfficiencies.symmetric(1 / 3))
    assert r.i_AE == pytest.approx(2 / 3, abs=1e-12)
    assert r.i_AB == pytest.approx(1 - h_direct(1 / 3), abs=1e-12)
    assert r.i_AB == pytest.approx(0.081704, abs=1e-6)
    assert r.i_AE - r.i_AB == pytest.approx(0.584963, abs=1e-6)


def test_info_report_total_mismatch():
    r = info_report(TOTAL)
    assert r.i_AE == 1.0
    assert r.qber == 0.0
    assert r.p_e_given_a[0]["Z0"] == 1.0


def test_info_report_unit_efficiencies():
    r = info_report(UNIT)
    assert r.qber == 0.5
    assert r.h_A_given_E == pytest.approx(0.5, abs=1e-15)


def test_info_report_tables_normalised(rng):
    for e in random_efficiencies(rng, 500, low=1e-6):
        r = info_report(e)
        assert sum(r.p_a.values()) == pytest.approx(1, abs=1e-12)
        assert sum(r.p_e.values()) == pytest.approx(1, abs=1e-12)
        for a in (0, 1):
            assert sum(r.p_e_given_a[a].values()) == pytest.approx(1, abs=1e-12)
            assert sum(r.p_b_given_a[a].values()) == pytest.approx(1, abs=1e-12)
        for k, pe in r.p_e.items():
            if pe > 0:
                assert r.p_a_given_e[0][k] + r.p_a_given_e[1][k] == pytest.approx(1, abs=1e-12)
        assert 0 <= r.i_AB <= 1 and 0 <= r.i_AE <= 1


def test_conditional_entropy_equals_qber(rng):
    for e in random_efficiencies(rng, 10_000, low=1e-9):
        r = info_report(e)
        assert abs(r.h_A_given_E - r.qber) <= 1e-10
        assert abs(r.i_AE - (r.h_A - qber_attack(e))) <= 1e-10
        assert r.i_AB <= r.i_AE + 1e-12


def test_qber_and_arrival_ranges(rng):
    for e in random_efficiencies(rng, 2000):
        assert 0 <= qber_attack(e) <= 2 / 3 + 1e-15
        assert 0 <= p_arrive(e) <= 1
    assert qber_attack(AttackEfficiencies(0, 0.3, 0.7, 0)) == pytest.approx(2 / 3)


@pytest.mark.parametrize("eta", [0.0, 1e-3, 0.05, 1 / 3, 0.5, 0.9, 1.0])
def test_symmetric_point_matches_full_report(eta):
    qber, i_ab, i_ae = symmetric_curve_point(eta)
    r = info_report(AttackEfficiencies.symmetric(eta))
    assert qber == pytest.approx(r.qber, abs=1e-12)
    assert i_ab == pytest.approx(r.i_AB, abs=1e-12)
    assert i_ae == pytest.approx(r.i_AE, abs=1e-12)


def test_symmetric_point_values():
    assert symmetric_curve_point(0.0) == (0.0, 1.0, 1.0)
    qber, i_ab, i_ae = symmetric_curve_point(1 / 3)
    assert (qber, i_ab, i_ae) == pytest.approx((1 / 3, 0.081704, 2 / 3), abs=1e-6)
    # threshold: 2 eta / (1 + 3 eta) = 0.11  ->  eta = 0.11 / (2 - 0.33)
    assert symmetric_curve_point(0.11 / 1.67)[0] == pytest.approx(0.11, abs=1e-15)
    assert 0.11 / 1.67 == pytest.approx(0.065868, abs=1e-6)


def test_binary_entropy():
    assert binary_entropy(0) == 0.0
    assert binary_entropy(1) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(1 / 3) == pytest.approx(0.918296, abs=1e-6)
    assert np.allclose(binary_entropy(np.array([0.1, 0.2])), [h_direct(0.1), h_direct(0.2)], atol=1e-15)
    with pytest.raises(ValueError):
        binary_entropy(1.5)
