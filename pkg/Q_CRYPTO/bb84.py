# -*- coding: utf-8 -*-
"""
bb84.py contains the key distribution protocol between Alice and Bob:
quantum transmission of randomly encoded photons, public sifting of the
pulses Bob detected in the right basis, public comparison of a random subset
of the sifted bits to detect eavesdropping, and use of the surviving bits as
a one-time pad.

Encoding: a horizontal or 45-degree photon stands for 0, a vertical or
135-degree photon for 1.
"""

import enum
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from Q_CRYPTO.channels import (ClassicalChannelLog, PublicLink, QuantumChannelConfig,
                               Transcript, send_photon)
from Q_CRYPTO.exceptions import (CommunicationsSuppressed, DoubleSpendError,
                                 InvalidArgument, KeyExhaustedError)
from Q_CRYPTO.quantum import DIAGONAL, RECTILINEAR, measure_photon

LOGGER = logging.getLogger(__name__)

BASES = (RECTILINEAR, DIAGONAL)
BASIS_LETTERS = ('R', 'D')
_ENCODED = [[basis.vectors[bit] for bit in (0, 1)] for basis in BASES]


def basis_index(letter):
    try:
        return BASIS_LETTERS.index(letter)
    except ValueError:
        raise InvalidArgument('Unknown basis %r' % (letter,), field='basis')


def encode(bit, basis):
    """Photon for `bit` in `basis` (index 0/1, letter 'R'/'D' or Basis)."""
    if not isinstance(basis, (int, np.integer)):
        basis = basis_index(basis if isinstance(basis, str) else basis.kind.value)
    return _ENCODED[int(basis)][int(bit)]


@dataclass(frozen=True)
class Pulse:
    bit: int
    basis: str

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise InvalidArgument('Pulse bit must be 0 or 1', field='bit')
        basis_index(self.basis)

    @property
    def photon(self):
        return encode(self.bit, self.basis)


@dataclass
class AliceRecord:
    bits: np.ndarray
    bases: np.ndarray
    photons: list

    def __len__(self):
        return len(self.bits)


@dataclass
class BobRecord:
    bases: np.ndarray
    bits: np.ndarray  # -1 where nothing was detected
    detected: np.ndarray
    events: list = field(default_factory=list)


@dataclass
class SiftResult:
    """
    kept / alice_bits : Alice's view of the sifted pulses.
    bob_kept / bob_bits : Bob's view, as delivered to him on the public
        channel (equal to Alice's unless the channel was tampered with).
    """
    kept: np.ndarray
    alice_bits: np.ndarray
    bob_kept: np.ndarray
    bob_bits: np.ndarray

    def __len__(self):
        return len(self.bob_kept)


class Verdict(enum.Enum):
    ACCEPTED = 'accepted'
    REJECTED = 'rejected'
    SUPPRESSED = 'suppressed'


class SecretKey:
    """
    Shared secret bits with a consumption ledger. Each bit can be used once,
    by one consumer (one-time pad or authentication pool).
    """

    def __init__(self, bits):
        self._bits = np.array(bits, dtype=np.int8).reshape(-1)
        self._bits.setflags(write=False)
        self._consumed = np.zeros(len(self._bits), dtype=bool)
        self.ledger = []

    def __len__(self):
        return len(self._bits)

    @property
    def bits(self):
        return self._bits.copy()

    @property
    def available(self):
        return int(np.count_nonzero(~self._consumed))

    def segment(self, start, stop):
        """A fixed slice of the key that a consumer can be handed."""
        if not 0 <= start <= stop <= len(self._bits):
            raise InvalidArgument('Segment [%d, %d) outside key of %d bits'
                                  % (start, stop, len(self._bits)))
        return KeySegment(self, np.arange(start, stop))

    def _consume(self, positions, consumer):
        positions = np.asarray(positions, dtype=int)
        if np.any(self._consumed[positions]):
            raise DoubleSpendError('Key bits already used: %s'
                                   % positions[self._consumed[positions]].tolist())
        self._consumed[positions] = True
        self.ledger.append((consumer, positions.tolist()))
        return self._bits[positions]

    def take(self, n, consumer):
        """Consume the next `n` unused bits."""
        free = np.flatnonzero(~self._consumed)
        if len(free) < n:
            raise KeyExhaustedError('Need %d key bits, %d left' % (n, len(free)))
        return self._consume(free[:n], consumer)


@dataclass(frozen=True)
class KeySegment:
    key: SecretKey
    positions: np.ndarray

    def __len__(self):
        return len(self.positions)

    def consume(self, consumer, n=None):
        positions = self.positions if n is None else self.positions[:n]
        return self.key._consume(positions, consumer)


@dataclass
class KeyOutcome:
    verdict: Verdict
    compared: tuple = ()
    n_disagree: int = 0
    alice_key: Optional[SecretKey] = None
    bob_key: Optional[SecretKey] = None

    @property
    def key(self):
        return self.alice_key

    @property
    def accepted(self):
        return self.verdict is Verdict.ACCEPTED


def alice_prepare(n, rng):
    """
    Alice's random bits, random bases and the photon train encoding them.

    Returns
    -------
    AliceRecord
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument('Number of pulses must be >= 1, got %r' % (n,), field='n')
    bits = rng.bits(n, purpose='alice_bit')
    bases = rng.bits(n, purpose='alice_basis')
    photons = [_ENCODED[basis][bit] for bit, basis in zip(bits, bases)]
    return AliceRecord(bits, bases, photons)


def transmit(alice, cfg, rng):
    """Send Alice's photon train through the quantum channel."""
    return [send_photon(cfg, photon, rng, index=i) for i, photon in enumerate(alice.photons)]


def bob_receive(deliveries, rng):
    """
    Bob picks a random basis for every pulse and measures what his detector
    catches; the outcome index is the bit.

    Returns
    -------
    BobRecord
    """
    n = len(deliveries)
    bases = rng.bits(n, purpose='bob_basis')
    bits = np.full(n, -1, dtype=np.int8)
    detected = np.zeros(n, dtype=bool)
    for i, delivery in enumerate(deliveries):
        if delivery.detected:
            k, _ = measure_photon(delivery.photon, BASES[bases[i]], rng, purpose='bob_outcome')
            bits[i] = k
            detected[i] = True
    return BobRecord(bases, bits, detected, [d.event for d in deliveries])


def sift(alice, bob, link):
    """
    Public discussion of bases. Bob lists the pulses he detected and the bases
    he used, Alice answers with the ones that match hers. No bit value is
    said aloud.

    Returns
    -------
    SiftResult
    """
    detected = np.flatnonzero(bob.detected)
    received = link.send('bob', {
        'type': 'bases',
        'indices': detected.tolist(),
        'bases': [BASIS_LETTERS[b] for b in bob.bases[detected]],
    })
    ok = [int(i) for i, letter in zip(received['indices'], received['bases'])
          if 0 <= int(i) < len(alice) and BASIS_LETTERS[alice.bases[int(i)]] == letter]
    reply = link.send('alice', {'type': 'ok', 'indices': ok})
    kept = np.array(ok, dtype=int)
    bob_kept = np.array([int(i) for i in reply['indices'] if 0 <= int(i) < len(bob.bits)], dtype=int)
    return SiftResult(kept, alice.bits[kept], bob_kept, bob.bits[bob_kept])


def detect_eavesdropping(sifted, fraction, rng, link, n_compare=None, threshold=0):
    """
    Bob reveals his bits at a random subset of the sifted positions, Alice
    confirms or denies them.

    Parameters
    ----------
    sifted : SiftResult
    fraction : float
        Share of the sifted bits to sacrifice, ceil(fraction * len) positions.
    rng : random source
    link : PublicLink
    n_compare : int, optional
        Exact number of positions to compare instead of `fraction`.
    threshold : int
        Disagreements tolerated. Anything but 0 goes beyond the noiseless
        protocol and is logged as such.

    Returns
    -------
    KeyOutcome
        Accepted when neither side saw more than `threshold` disagreements;
        the key is the sifted bits that were not revealed.
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidArgument('Compare fraction must be in [0, 1]', field='compare_fraction')
    if threshold:
        LOGGER.warning('Tolerating %d disagreements: not part of the noiseless protocol', threshold)
    size = len(sifted.bob_kept)
    if size == 0:
        LOGGER.warning('Nothing survived sifting; cannot certify a key')
        return KeyOutcome(Verdict.REJECTED)
    k = int(math.ceil(fraction * size)) if n_compare is None else int(n_compare)
    k = min(max(k, 0), size)
    if k == 0:
        LOGGER.warning('No bits compared; the key is unchecked')
    positions = rng.sample(size, k, purpose='compare')
    revealed = sifted.bob_kept[positions]
    received = link.send('bob', {
        'type': 'reveal',
        'indices': revealed.tolist(),
        'bits': sifted.bob_bits[positions].tolist(),
    })
    alice_view = dict(zip(sifted.kept.tolist(), sifted.alice_bits.tolist()))
    disagree = [int(i) for i, b in zip(received['indices'], received['bits'])
                if alice_view.get(int(i)) != int(b)]
    reply = link.send('alice', {'type': 'confirm', 'disagree': disagree})
    n_disagree = max(len(disagree), len(reply['disagree']))
    if n_disagree > threshold:
        return KeyOutcome(Verdict.REJECTED, tuple(revealed.tolist()), n_disagree)
    alice_drop = set(int(i) for i in received['indices'])
    alice_key = [b for i, b in zip(sifted.kept.tolist(), sifted.alice_bits.tolist()) if i not in alice_drop]
    keep = np.ones(size, dtype=bool)
    keep[positions] = False
    return KeyOutcome(Verdict.ACCEPTED, tuple(revealed.tolist()), n_disagree,
                      SecretKey(alice_key), SecretKey(sifted.bob_bits[keep]))


def one_time_pad(key, message):
    """
    XOR `message` bits with fresh key bits.

    Parameters
    ----------
    key : SecretKey or KeySegment
        A SecretKey hands out its next unused bits; a KeySegment is used as
        is and fails if any of its bits were already spent.
    message : sequence of bits

    Returns
    -------
    numpy.ndarray
        Ciphertext bits. Applying the same pad again decrypts.
    """
    message = np.asarray(message, dtype=np.int8).reshape(-1)
    if isinstance(key, KeySegment):
        if len(key) < len(message):
            raise KeyExhaustedError('Segment of %d bits for a %d bit message' % (len(key), len(message)))
        pad = key.consume('one_time_pad', n=len(message))
    else:
        pad = key.take(len(message), 'one_time_pad')
    return np.bitwise_xor(message, pad)


def secrecy_violations(log, outcome):
    """Sifted positions whose value was said in public without being compared."""
    allowed = set(outcome.compared)
    leaked = []
    for message in log:
        try:
            obj = json.loads(message.original)
        except ValueError:
            continue
        body = obj.get('body', obj) if isinstance(obj, dict) else {}
        if 'bits' in body:
            leaked.extend(int(i) for i in body.get('indices', []) if int(i) not in allowed)
    return leaked


@dataclass
class SessionResult:
    summary: dict
    outcome: KeyOutcome
    alice: AliceRecord
    bob: BobRecord
    sift: Optional[SiftResult] = None
    transcript: Optional[Transcript] = None
    log: Optional[ClassicalChannelLog] = None


def _pulse_records(alice, bob):
    records = []
    for i, event in enumerate(bob.events):
        records.append({
            'index': i,
            'fate': event.fate.value,
            'detected': bool(event.detected),
            'alice_bit': int(alice.bits[i]),
            'alice_basis': BASIS_LETTERS[alice.bases[i]],
            'bob_basis': BASIS_LETTERS[bob.bases[i]],
            'bob_bit': int(bob.bits[i]) if bob.detected[i] else None,
            'eve': event.details,
        })
    return records


def run_session(n, rng, channel=None, fraction=1.0 / 3.0, n_compare=None, threshold=0,
                link=None, seed=None, record=False):
    """
    One complete key distribution session.

    Parameters
    ----------
    n : int
        Pulses Alice sends.
    rng : random source
    channel : QuantumChannelConfig, optional
        Lossless, perfectly efficient and unobserved by default.
    fraction, n_compare, threshold
        See ``detect_eavesdropping``.
    link : PublicLink, optional
        Public discussion link; a plain one over a fresh log by default. Pass
        an ``auth.AuthenticatedLink`` to authenticate every message.
    seed : int, optional
        Only copied into the summary.
    record : bool
        Keep a full Transcript.

    Returns
    -------
    SessionResult
    """
    channel = channel or QuantumChannelConfig()
    link = link or PublicLink(ClassicalChannelLog())
    eve = channel.eavesdropper
    if eve is not None and hasattr(eve, 'reset'):
        eve.reset()

    alice = alice_prepare(n, rng)
    bob = bob_receive(transmit(alice, channel, rng), rng)

    sifted = None
    try:
        sifted = sift(alice, bob, link)
        outcome = detect_eavesdropping(sifted, fraction, rng, link, n_compare=n_compare,
                                       threshold=threshold)
    except CommunicationsSuppressed as exc:
        LOGGER.warning('Session aborted, public discussion suppressed: %s', exc)
        outcome = KeyOutcome(Verdict.SUPPRESSED)

    n_detected = int(np.count_nonzero(bob.detected))
    n_sifted = len(sifted) if sifted is not None else 0
    if n_sifted:
        errors = alice.bits[sifted.bob_kept] != sifted.bob_bits
        qber = float(np.mean(errors))
    else:
        qber = 0.0
    key_length = len(outcome.alice_key) if outcome.accepted else 0

    tampered = bool(link.log.tamper_events)
    keys_match = (not outcome.accepted
                  or np.array_equal(outcome.alice_key.bits, outcome.bob_key.bits))
    invariant_ok = bool(keys_match or eve is not None or tampered)
    invariant_ok = invariant_ok and not secrecy_violations(link.log, outcome)
    if not invariant_ok:
        LOGGER.error('Session broke an invariant (key mismatch or leaked key bits)')

    summary = {
        'n_sent': int(n),
        'n_detected': n_detected,
        'n_sifted': n_sifted,
        'n_compared': len(outcome.compared),
        'n_disagree': int(outcome.n_disagree),
        'verdict': outcome.verdict.value,
        'key_length': key_length,
        'seed': seed,
        'eve': getattr(eve, 'name', 'none') if eve is not None else 'none',
        'qber': qber,
        'sift_rate': n_sifted / n_detected if n_detected else 0.0,
        'invariant_ok': invariant_ok,
    }
    transcript = None
    if record:
        transcript = Transcript(_pulse_records(alice, bob), link.log)
    return SessionResult(summary, outcome, alice, bob, sifted, transcript, link.log)
