# -*- coding: utf-8 -*-
"""
channels.py contains the simulated transmission media: the quantum channel
(transit loss, eavesdropper hook, detector inefficiency), the public classical
channel (always tappable, optionally tampered with), the random sources that
drive every probabilistic choice, and the Transcript record of a run.

Random sources take a ``purpose`` name on every draw. A seeded source ignores
it; a scripted source keeps one queue of predetermined values per purpose,
which is how the worked tables are replayed cell by cell.
"""

import enum
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from Q_CRYPTO.exceptions import (CommunicationsSuppressed, InvalidArgument,
                                 ScriptError, ScriptExhaustedError)

LOGGER = logging.getLogger(__name__)


class SeededSource:
    """
    Random source over a numpy Generator.

    Parameters
    ----------
    generator : numpy.random.Generator
    """

    def __init__(self, generator):
        self.generator = generator

    def random(self, purpose=None):
        return float(self.generator.random())

    def bit(self, purpose=None):
        return int(self.generator.integers(0, 2))

    def bits(self, n, purpose=None):
        return self.generator.integers(0, 2, size=n, dtype=np.int8)

    def bernoulli(self, p, purpose=None):
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return bool(self.generator.random() < p)

    def outcome(self, probabilities, purpose=None):
        cumulative = np.cumsum(probabilities)
        k = int(np.searchsorted(cumulative, self.generator.random() * cumulative[-1], side='right'))
        return min(k, len(cumulative) - 1)

    def sample(self, population, k, purpose=None):
        """k distinct indices out of range(population), sorted."""
        return np.sort(self.generator.choice(population, size=k, replace=False))


class ScriptedSource:
    """
    Random source that replays predetermined values, one queue per purpose.

    When a queue is empty the draw goes to `fallback`, or raises
    ScriptExhaustedError when there is none. Every value handed out is kept
    in `record`.

    Parameters
    ----------
    streams : dict
        purpose -> iterable of values (bits as 0/1, outcomes as indices,
        bernoulli draws as booleans, samples as indices).
    fallback : random source, optional
    """

    def __init__(self, streams, fallback=None):
        self.streams = {key: deque(values) for key, values in streams.items()}
        self.fallback = fallback
        self.record = []

    def _has(self, purpose):
        return bool(self.streams.get(purpose))

    def _next(self, purpose):
        value = self.streams[purpose].popleft()
        self.record.append((purpose, value))
        return value

    def _missing(self, purpose):
        if self.fallback is None:
            raise ScriptExhaustedError('No scripted values left for %r' % purpose)
        return self.fallback

    def remaining(self):
        return {key: len(queue) for key, queue in self.streams.items() if queue}

    def random(self, purpose=None):
        if not self._has(purpose):
            return self._missing(purpose).random(purpose)
        return float(self._next(purpose))

    def bit(self, purpose=None):
        if not self._has(purpose):
            return self._missing(purpose).bit(purpose)
        value = int(self._next(purpose))
        if value not in (0, 1):
            raise ScriptError('Scripted %r value %r is not a bit' % (purpose, value))
        return value

    def bits(self, n, purpose=None):
        return np.array([self.bit(purpose) for _ in range(n)], dtype=np.int8)

    def bernoulli(self, p, purpose=None):
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        if not self._has(purpose):
            return self._missing(purpose).bernoulli(p, purpose)
        return bool(self._next(purpose))

    def outcome(self, probabilities, purpose=None):
        if not self._has(purpose):
            return self._missing(purpose).outcome(probabilities, purpose)
        k = int(self._next(purpose))
        if not 0 <= k < len(probabilities) or probabilities[k] <= 1e-12:
            raise ScriptError('Scripted %r outcome %d is impossible' % (purpose, k))
        return k

    def sample(self, population, k, purpose=None):
        if not self._has(purpose):
            return self._missing(purpose).sample(population, k, purpose)
        values = [int(self._next(purpose)) for _ in range(k)]
        if len(set(values)) != k or any(not 0 <= v < population for v in values):
            raise ScriptError('Scripted %r sample %r is not %d distinct indices' % (purpose, values, k))
        return np.array(sorted(values), dtype=int)


def seeded_rng(seed, trial=None):
    """
    Deterministic random source for a 64-bit `seed`.

    Parameters
    ----------
    seed : int
    trial : int, optional
        Derives an independent stream per trial from (seed, trial).
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2 ** 64:
        raise InvalidArgument('Seed must be an integer in [0, 2**64)', field='seed')
    if trial is None:
        sequence = np.random.SeedSequence(int(seed))
    else:
        sequence = np.random.SeedSequence(int(seed), spawn_key=(int(trial),))
    return SeededSource(np.random.Generator(np.random.PCG64(sequence)))


def scripted_rng(streams, fallback=None):
    return ScriptedSource(streams, fallback=fallback)


def _check_probability(value, name):
    if not (np.isfinite(value) and 0.0 <= value <= 1.0):
        raise InvalidArgument('%s must be a probability in [0, 1], got %r' % (name, value), field=name)


@dataclass
class QuantumChannelConfig:
    """
    Parameters
    ----------
    loss_probability : float
        Chance that a photon is destroyed in transit.
    detector_efficiency : float
        Chance that Bob's detector fires on a photon that arrives.
    eavesdropper : strategy, optional
        Object with ``intercept(index, photon, rng) -> (photon, details)``.
    """
    loss_probability: float = 0.0
    detector_efficiency: float = 1.0
    eavesdropper: Optional[object] = None

    def __post_init__(self):
        _check_probability(self.loss_probability, 'loss_probability')
        _check_probability(self.detector_efficiency, 'detector_efficiency')


class PulseFate(enum.Enum):
    DELIVERED = 'delivered'
    LOST_IN_TRANSIT = 'lost_in_transit'
    NOT_DETECTED = 'not_detected'
    INTERCEPTED = 'intercepted'


@dataclass(frozen=True)
class PulseEvent:
    index: int
    fate: PulseFate
    detected: bool
    details: Optional[dict] = None


@dataclass(frozen=True)
class Delivery:
    event: PulseEvent
    photon: Optional[object]

    @property
    def detected(self):
        return self.event.detected


def send_photon(cfg, photon, rng, index=0):
    """
    Push one photon through the quantum channel.

    Transit loss comes first, so a lost photon is never seen by the
    eavesdropper; the detector draw comes last.

    Returns
    -------
    Delivery
        The pulse event and, when Bob's detector fired, the photon he gets.
    """
    if rng.bernoulli(cfg.loss_probability, purpose='loss'):
        return Delivery(PulseEvent(index, PulseFate.LOST_IN_TRANSIT, False), None)
    details = None
    if cfg.eavesdropper is not None:
        photon, details = cfg.eavesdropper.intercept(index, photon, rng)
    detected = rng.bernoulli(cfg.detector_efficiency, purpose='detect')
    if details is not None:
        fate = PulseFate.INTERCEPTED
    elif detected:
        fate = PulseFate.DELIVERED
    else:
        fate = PulseFate.NOT_DETECTED
    return Delivery(PulseEvent(index, fate, detected, details), photon if detected else None)


@dataclass(frozen=True)
class ClassicalMessage:
    seq: int
    sender: str
    original: bytes
    delivered: Optional[bytes]

    @property
    def tampered(self):
        return self.delivered != self.original


class ClassicalChannelLog:
    """
    Append-only record of the public channel.

    Parameters
    ----------
    tamper : callable, optional
        Active adversary ``(sender, bytes) -> bytes or None``; None suppresses
        the delivery.
    """

    def __init__(self, tamper=None):
        self.tamper = tamper
        self.taps = []
        self._messages = []

    @property
    def messages(self):
        return tuple(self._messages)

    @property
    def tamper_events(self):
        return [m for m in self._messages if m.tampered]

    def read(self, seq):
        return self._messages[seq].delivered

    def __len__(self):
        return len(self._messages)

    def __iter__(self):
        return iter(self._messages)


def publish(log, sender, msg):
    """
    Put `msg` on the public channel.

    Every tap sees the original; the receiver sees what the active adversary
    (if any) lets through. Both forms are logged.

    Returns
    -------
    ClassicalMessage
    """
    original = bytes(msg)
    delivered = original if log.tamper is None else log.tamper(sender, original)
    message = ClassicalMessage(len(log._messages), sender, original,
                               None if delivered is None else bytes(delivered))
    log._messages.append(message)
    for tap in log.taps:
        tap(message)
    if message.tampered:
        LOGGER.debug('Message %d from %s altered in transit', message.seq, sender)
    return message


class PassiveTap:
    """Eavesdropper's copy of everything said in public."""

    def __init__(self, log=None):
        self.seen = []
        if log is not None:
            log.taps.append(self)

    def __call__(self, message):
        self.seen.append(message.original)

    @property
    def read_count(self):
        return len(self.seen)


def _swap_basis(letter):
    return {'R': 'D', 'D': 'R'}.get(letter, letter)


def _substitute_body(body):
    body = dict(body)
    if 'bits' in body:
        body['bits'] = [1 - int(b) for b in body['bits']]
    if 'bases' in body:
        body['bases'] = [_swap_basis(b) for b in body['bases']]
    if 'basis' in body:
        body['basis'] = _swap_basis(body['basis'])
    if body.get('indices'):
        body['indices'] = body['indices'][1:]
    if 'disagree' in body:
        body['disagree'] = []
    return body


def substitution_rule(sender=None):
    """
    Active adversary that rewrites protocol messages while leaving any
    authentication tag as it was: announced bits are flipped, bases swapped,
    the first listed index dropped and reported disagreements erased.
    """
    def rule(who, payload):
        if sender is not None and who != sender:
            return payload
        try:
            obj = json.loads(payload)
        except ValueError:
            return payload[::-1]
        if isinstance(obj, dict) and 'body' in obj:
            obj['body'] = _substitute_body(obj['body'])
        elif isinstance(obj, dict):
            obj = _substitute_body(obj)
        return encode_message(obj)
    return rule


def suppression_rule(sender=None):
    """Active adversary that drops messages."""
    def rule(who, payload):
        if sender is not None and who != sender:
            return payload
        return None
    return rule


def encode_message(obj):
    return json.dumps(obj, sort_keys=True, separators=(',', ':')).encode('utf-8')


class PublicLink:
    """
    Request/reply use of the classical channel for protocol messages, with no
    authentication: whatever the adversary delivers is believed.
    """

    def __init__(self, log):
        self.log = log

    def send(self, sender, body):
        message = publish(self.log, sender, encode_message(body))
        if message.delivered is None:
            raise CommunicationsSuppressed('Message %d from %s was suppressed' % (message.seq, sender))
        try:
            return json.loads(message.delivered)
        except ValueError:
            raise CommunicationsSuppressed('Message %d from %s arrived garbled' % (message.seq, sender))


@dataclass
class Transcript:
    """Per-pulse and per-message record of one protocol run."""
    pulses: list = field(default_factory=list)
    log: Optional[ClassicalChannelLog] = None

    def add_pulse(self, record):
        self.pulses.append(record)

    def to_records(self, trial=None):
        records = []
        for pulse in self.pulses:
            records.append(dict(pulse, kind='pulse', trial=trial))
        for message in (self.log or ()):
            records.append({
                'kind': 'message',
                'trial': trial,
                'seq': message.seq,
                'sender': message.sender,
                'original': message.original.decode('utf-8', 'backslashreplace'),
                'delivered': (None if message.delivered is None
                              else message.delivered.decode('utf-8', 'backslashreplace')),
                'tampered': message.tampered,
            })
        return records

    def write_jsonl(self, handle, trial=None):
        for record in self.to_records(trial):
            handle.write(json.dumps(record, sort_keys=True) + '\n')

    def __eq__(self, other):
        if not isinstance(other, Transcript):
            return NotImplemented
        return self.to_records() == other.to_records()
