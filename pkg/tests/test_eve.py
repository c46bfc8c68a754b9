# -*- coding: utf-8 -*-
"""
Using pytest to create unit tests for the eavesdropping strategies and the
information / disturbance tradeoff they obey.
"""

import numpy as np
import pytest

from Q_CRYPTO.bb84 import BASES
from Q_CRYPTO.channels import seeded_rng
from Q_CRYPTO.eve import (EveStrategy, InterceptRecord, binary_entropy, estimate_stats,
                          information_gain, intercept_resend, strategy_from_spec)
from Q_CRYPTO.exceptions import InvalidArgument
from Q_CRYPTO.quantum import Basis

N = 100_000


def test_noop_strategy():
    stats = estimate_stats(EveStrategy(), 20_000, seeded_rng(1))
    assert stats.info_bits == 0.0
    assert stats.disturbance == 0.0
    assert not stats.low_confidence


def test_rectilinear_tradeoff():
    stats = estimate_stats(intercept_resend('rectilinear'), N, seeded_rng(2))
    assert abs(stats.info_bits - 0.5) <= 0.01
    assert abs(stats.disturbance - 0.25) <= 0.01
    assert stats.satisfies_tradeoff()
    # measuring in the right basis disturbs nothing
    assert stats.n_match > 0
    assert stats.d_match == 0.0
    assert abs(stats.d_mismatch - 0.5) <= 0.02


def test_random_basis_tradeoff():
    stats = estimate_stats(intercept_resend('random'), N, seeded_rng(3))
    assert abs(stats.disturbance - 0.25) <= 0.01
    assert stats.info_bits <= 0.5 + stats.info_radius
    assert stats.satisfies_tradeoff()
    assert stats.d_match == 0.0


def test_midway_basis_tradeoff():
    stats = estimate_stats(intercept_resend(np.pi / 8), N, seeded_rng(4))
    assert abs(stats.disturbance - 0.25) <= 0.01
    # 1 - H(cos^2(pi/8))
    expected = 1 - binary_entropy(np.cos(np.pi / 8) ** 2)
    assert abs(stats.info_bits - expected) <= 1e-9
    assert stats.info_bits <= 0.5 + stats.info_radius
    assert stats.satisfies_tradeoff()


def test_partial_interception():
    stats = estimate_stats(strategy_from_spec('intercept-rectilinear@0.5'), 40_000, seeded_rng(5))
    assert abs(stats.disturbance - 0.125) <= 4 * np.sqrt(0.125 * 0.875 / stats.n_checked)
    assert stats.satisfies_tradeoff()


def test_low_confidence_flag():
    stats = estimate_stats(intercept_resend('rectilinear'), 1000, seeded_rng(1))
    assert stats.low_confidence
    assert set(stats.to_dict()) >= {'info_bits', 'disturbance', 'info_radius', 'disturbance_radius'}


def test_information_gain():
    rect = InterceptRecord(0, BASES[0], 1)
    assert information_gain(rect, 0) == pytest.approx(1.0)
    assert information_gain(rect, 1) == pytest.approx(0.0)
    assert information_gain(None, 0) == 0.0
    midway = InterceptRecord(0, Basis.angle(np.pi / 8), 0)
    assert information_gain(midway, 0) == pytest.approx(information_gain(midway, 1))


def test_strategy_specs():
    assert strategy_from_spec('none').name == 'none'
    assert strategy_from_spec('intercept-diagonal').name == 'intercept-diagonal'
    assert strategy_from_spec('intercept-random@0.25').fraction == 0.25
    angle = strategy_from_spec('intercept-angle:0.3926990817')
    assert angle.basis.equivalent(Basis.angle(np.pi / 8))
    for bad in ('intercept-sideways', 'listen', 'intercept-angle:x', 'intercept-rectilinear@2'):
        with pytest.raises(InvalidArgument):
            strategy_from_spec(bad)


def test_records_reset_per_session():
    strategy = intercept_resend('diagonal')
    estimate_stats(strategy, 500, seeded_rng(1))
    first = dict(strategy.records)
    estimate_stats(strategy, 200, seeded_rng(2))
    assert max(strategy.records) < 200
    assert len(first) == 500
