# -*- coding: utf-8 -*-
"""
Using pytest to create unit tests for the simulated channels and random sources.
"""

import json

import numpy as np
import pytest

from Q_CRYPTO.channels import (ClassicalChannelLog, PassiveTap, PublicLink, PulseFate,
                               QuantumChannelConfig, Transcript, encode_message, publish,
                               scripted_rng, seeded_rng, send_photon, substitution_rule,
                               suppression_rule)
from Q_CRYPTO.exceptions import (CommunicationsSuppressed, InvalidArgument,
                                 ScriptError, ScriptExhaustedError)
from Q_CRYPTO.quantum import R1


class CountingEve:
    name = 'counting'

    def __init__(self):
        self.seen = 0

    def intercept(self, index, photon, rng):
        self.seen += 1
        return photon, {'basis': 'R', 'outcome': 0}


def test_loss_and_detection_rates():
    rng = seeded_rng(2)
    cfg = QuantumChannelConfig(loss_probability=0.3, detector_efficiency=0.6)
    n = 20_000
    fates = [send_photon(cfg, R1, rng, i).event.fate for i in range(n)]
    lost = fates.count(PulseFate.LOST_IN_TRANSIT) / n
    delivered = fates.count(PulseFate.DELIVERED) / n
    assert abs(lost - 0.3) <= 4 * np.sqrt(0.3 * 0.7 / n)
    assert abs(delivered - 0.42) <= 4 * np.sqrt(0.42 * 0.58 / n)


def test_lost_photons_never_reach_eve():
    eve = CountingEve()
    cfg = QuantumChannelConfig(loss_probability=1.0, eavesdropper=eve)
    delivery = send_photon(cfg, R1, seeded_rng(1))
    assert eve.seen == 0
    assert not delivery.detected
    assert delivery.photon is None
    cfg = QuantumChannelConfig(eavesdropper=eve)
    delivery = send_photon(cfg, R1, seeded_rng(1), index=4)
    assert eve.seen == 1
    assert delivery.event.fate is PulseFate.INTERCEPTED
    assert delivery.event.index == 4


def test_invalid_channel():
    with pytest.raises(InvalidArgument):
        QuantumChannelConfig(loss_probability=1.5)
    with pytest.raises(InvalidArgument):
        QuantumChannelConfig(detector_efficiency=np.nan)


def test_seeded_streams():
    a = seeded_rng(7, trial=3).bits(64)
    b = seeded_rng(7, trial=3).bits(64)
    c = seeded_rng(7, trial=4).bits(64)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(InvalidArgument):
        seeded_rng(-1)
    with pytest.raises(InvalidArgument):
        seeded_rng(2 ** 64)
    sample = seeded_rng(1).sample(10, 4)
    assert len(set(sample.tolist())) == 4
    assert list(sample) == sorted(sample)


def test_scripted_source():
    rng = scripted_rng({'alice_bit': [1, 0], 'detect': [False]})
    assert list(rng.bits(2, purpose='alice_bit')) == [1, 0]
    assert rng.bernoulli(0.5, purpose='detect') is False
    # certain events are not drawn from the script
    assert rng.bernoulli(1.0, purpose='detect') is True
    with pytest.raises(ScriptExhaustedError):
        rng.bit(purpose='alice_bit')
    assert rng.record == [('alice_bit', 1), ('alice_bit', 0), ('detect', False)]

    with pytest.raises(ScriptError):
        scripted_rng({'x': [2]}).bit(purpose='x')
    with pytest.raises(ScriptError):
        scripted_rng({'x': [1, 1]}).sample(5, 2, purpose='x')

    fallback = scripted_rng({'alice_bit': [1]}, fallback=seeded_rng(1))
    assert fallback.bit(purpose='alice_bit') == 1
    assert fallback.bit(purpose='alice_bit') in (0, 1)
    assert fallback.remaining() == {}


def test_passive_tap_reads_everything():
    log = ClassicalChannelLog()
    tap = PassiveTap(log)
    publish(log, 'alice', b'hello')
    publish(log, 'bob', b'world')
    assert tap.read_count == 2
    assert log.read(1) == b'world'
    assert not log.tamper_events


def test_substitution_is_logged():
    log = ClassicalChannelLog(tamper=substitution_rule())
    link = PublicLink(log)
    body = link.send('bob', {'bits': [0, 1], 'bases': ['R', 'D']})
    assert body == {'bits': [1, 0], 'bases': ['D', 'R']}
    message = log.messages[0]
    assert message.tampered
    assert json.loads(message.original) == {'bits': [0, 1], 'bases': ['R', 'D']}
    assert log.tamper_events == [message]


def test_substitution_only_for_one_sender():
    log = ClassicalChannelLog(tamper=substitution_rule(sender='alice'))
    link = PublicLink(log)
    assert link.send('bob', {'basis': 'R'}) == {'basis': 'R'}
    assert link.send('alice', {'basis': 'R'}) == {'basis': 'D'}


def test_suppression():
    log = ClassicalChannelLog(tamper=suppression_rule())
    with pytest.raises(CommunicationsSuppressed):
        PublicLink(log).send('alice', {'type': 'ok'})
    assert log.messages[0].delivered is None


def test_transcript_records():
    log = ClassicalChannelLog()
    publish(log, 'alice', encode_message({'a': 1}))
    transcript = Transcript(log=log)
    transcript.add_pulse({'index': 0, 'fate': 'delivered'})
    records = transcript.to_records(trial=2)
    assert [r['kind'] for r in records] == ['pulse', 'message']
    assert records[1]['original'] == '{"a":1}'
    assert all(r['trial'] == 2 for r in records)
