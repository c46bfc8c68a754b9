# -*- coding: utf-8 -*-
"""
Using pytest to create unit tests for the key distribution protocol.
"""

import json
import math

import numpy as np
import pytest

from Q_CRYPTO import bb84
from Q_CRYPTO.bb84 import (KeyOutcome, SecretKey, Verdict, alice_prepare, bob_receive,
                           detect_eavesdropping, one_time_pad, run_session, sift, transmit)
from Q_CRYPTO.channels import (ClassicalChannelLog, PassiveTap, PublicLink,
                               QuantumChannelConfig, seeded_rng, substitution_rule,
                               suppression_rule)
from Q_CRYPTO.eve import intercept_resend
from Q_CRYPTO.exceptions import DoubleSpendError, InvalidArgument, KeyExhaustedError


def test_prepare_rejects_empty():
    with pytest.raises(InvalidArgument):
        alice_prepare(0, seeded_rng(1))


def test_encoding():
    assert bb84.Pulse(1, 'D').photon is bb84.encode(1, bb84.DIAGONAL)
    with pytest.raises(InvalidArgument):
        bb84.Pulse(2, 'R')
    with pytest.raises(InvalidArgument):
        bb84.Pulse(0, 'X')


def test_sift_rate_and_clean_keys():
    result = run_session(100_000, seeded_rng(1))
    summary = result.summary
    assert abs(summary['sift_rate'] - 0.5) <= 0.006
    assert summary['qber'] == 0.0
    assert summary['verdict'] == 'accepted'
    assert np.array_equal(result.outcome.alice_key.bits, result.outcome.bob_key.bits)
    assert summary['key_length'] == summary['n_sifted'] - summary['n_compared']
    assert summary['invariant_ok']


def test_undetected_pulses_are_never_kept():
    rng = seeded_rng(4)
    cfg = QuantumChannelConfig(loss_probability=0.2, detector_efficiency=0.5)
    alice = alice_prepare(2000, rng)
    bob = bob_receive(transmit(alice, cfg, rng), rng)
    sifted = sift(alice, bob, PublicLink(ClassicalChannelLog()))
    assert bob.detected[sifted.kept].all()
    assert np.array_equal(alice.bases[sifted.kept], bob.bases[sifted.kept])
    assert np.array_equal(sifted.alice_bits, sifted.bob_bits)


def test_sifting_says_no_bit_values():
    log = ClassicalChannelLog()
    tap = PassiveTap(log)
    rng = seeded_rng(9)
    alice = alice_prepare(500, rng)
    bob = bob_receive(transmit(alice, QuantumChannelConfig(), rng), rng)
    sift(alice, bob, PublicLink(log))
    assert tap.read_count == 2
    for raw in tap.seen:
        assert 'bits' not in json.loads(raw)


def test_compare_subset_size():
    result = run_session(3000, seeded_rng(2))
    summary = result.summary
    assert summary['n_compared'] == math.ceil(summary['n_sifted'] / 3)
    assert not bb84.secrecy_violations(result.log, result.outcome)
    compared = set(result.outcome.compared)
    assert compared <= set(result.sift.kept.tolist())


def test_empty_sift_is_rejected():
    cfg = QuantumChannelConfig(loss_probability=1.0)
    result = run_session(50, seeded_rng(1), cfg)
    assert result.outcome.verdict is Verdict.REJECTED
    assert result.summary['n_sifted'] == 0


def test_intercept_resend_is_caught():
    cfg = QuantumChannelConfig(eavesdropper=intercept_resend('rectilinear'))
    result = run_session(2000, seeded_rng(3), cfg)
    assert result.outcome.verdict is Verdict.REJECTED
    assert result.outcome.alice_key is None


@pytest.mark.parametrize('k, trials', [(5, 30_000), (10, 10_000), (20, 10_000)])
def test_detection_probability(k, trials):
    rejected = 0
    for trial in range(trials):
        cfg = QuantumChannelConfig(eavesdropper=intercept_resend('rectilinear'))
        result = run_session(6 * k, seeded_rng(77, trial), cfg, n_compare=k)
        assert result.summary['n_compared'] == k or result.summary['n_sifted'] < k
        rejected += result.outcome.verdict is Verdict.REJECTED
    assert abs(rejected / trials - (1 - 0.75 ** k)) <= 0.01


def test_threshold_tolerates_disagreements():
    cfg = QuantumChannelConfig(eavesdropper=intercept_resend('rectilinear'))
    result = run_session(400, seeded_rng(5), cfg, threshold=10_000)
    assert result.outcome.accepted
    assert result.outcome.n_disagree > 0


def test_suppressed_session():
    link = PublicLink(ClassicalChannelLog(tamper=suppression_rule()))
    result = run_session(200, seeded_rng(1), link=link)
    assert result.outcome.verdict is Verdict.SUPPRESSED
    assert result.summary['key_length'] == 0


def test_unauthenticated_substitution_is_rejected():
    link = PublicLink(ClassicalChannelLog(tamper=substitution_rule(sender='bob')))
    result = run_session(600, seeded_rng(6), link=link)
    assert link.log.tamper_events
    # swapped bases make Alice approve the wrong pulses, which the comparison catches
    assert result.outcome.verdict is Verdict.REJECTED


def test_determinism():
    a = run_session(1000, seeded_rng(12), record=True)
    b = run_session(1000, seeded_rng(12), record=True)
    assert a.transcript == b.transcript
    assert a.summary == b.summary


def test_one_time_pad():
    key = SecretKey([1, 0, 1, 1, 0, 0, 1, 0])
    message = [1, 1, 1, 1]
    cipher = one_time_pad(key, message)
    assert key.available == 4
    assert list(cipher) == [0, 1, 0, 0]
    # the receiver applies the same key bits
    twin = SecretKey([1, 0, 1, 1, 0, 0, 1, 0])
    assert list(one_time_pad(twin, cipher)) == message
    with pytest.raises(KeyExhaustedError):
        one_time_pad(key, [0] * 5)


def test_key_bits_spent_once():
    key = SecretKey(np.zeros(16, dtype=int))
    segment = key.segment(0, 8)
    one_time_pad(segment, [1] * 8)
    with pytest.raises(DoubleSpendError):
        one_time_pad(segment, [1] * 8)
    with pytest.raises(KeyExhaustedError):
        one_time_pad(key.segment(8, 10), [1] * 3)
    assert key.available == 8
    with pytest.raises(InvalidArgument):
        key.segment(10, 20)


def test_invalid_compare_fraction():
    result = run_session(100, seeded_rng(1))
    with pytest.raises(InvalidArgument):
        detect_eavesdropping(result.sift, 1.5, seeded_rng(1), PublicLink(ClassicalChannelLog()))
    outcome = detect_eavesdropping(result.sift, 0.0, seeded_rng(1), PublicLink(ClassicalChannelLog()))
    assert isinstance(outcome, KeyOutcome)
    assert outcome.compared == ()
    assert len(outcome.key) == len(result.sift)
