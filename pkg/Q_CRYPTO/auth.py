# -*- coding: utf-8 -*-
"""
auth.py contains the message authentication used on the public channel:
a polynomial-evaluation hash over a prime field, truncated to the tag width
and masked with fresh one-time key bits for every message.

Key budget, per pool:

    * 2 * tag_width bits for the polynomial key, once per epoch
      (`epoch_messages` messages, 64 by default);
    * tag_width bits of mask for every message.

Both parties hold identical pools and consume them in lockstep. Consumed bits
are never reused; the pool is topped up from bb84 key bits with
``replenish``.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np

from Q_CRYPTO.bb84 import KeySegment, SecretKey
from Q_CRYPTO.channels import PublicLink, encode_message, publish
from Q_CRYPTO.exceptions import (CommunicationsSuppressed, DesyncError, InvalidArgument,
                                 KeyExhaustedError)

LOGGER = logging.getLogger(__name__)

# Primes just below 2**(2 * width), so every hash key and message block fits.
PRIMES = {
    8: 2 ** 16 - 15,
    16: 2 ** 32 - 5,
    32: 2 ** 64 - 59,
    64: 2 ** 128 - 159,
}
DEFAULT_TAG_WIDTH = 32


def _check_width(width):
    if width not in PRIMES:
        raise InvalidArgument('Tag width must be one of %s, got %r' % (sorted(PRIMES), width),
                              field='tag_width')


def _bits_to_int(bits):
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def poly_hash(key, msg, width=DEFAULT_TAG_WIDTH):
    """
    Evaluate the message polynomial at `key` modulo the prime for `width`,
    truncated to `width` bits.

    The message length is the leading coefficient, so messages that differ
    only in trailing zero bytes hash differently.
    """
    _check_width(width)
    p = PRIMES[width]
    block = (2 * width) // 8 - 1
    msg = bytes(msg)
    h = len(msg) % p
    for start in range(0, len(msg), block):
        h = (h * key + int.from_bytes(msg[start:start + block], 'big')) % p
    h = (h * key) % p
    return h & ((1 << width) - 1)


@dataclass(frozen=True)
class Tag:
    value: int
    width: int
    offset: int

    @property
    def hex(self):
        return '%0*x' % (self.width // 4, self.value)

    @classmethod
    def from_hex(cls, text, width, offset):
        try:
            value = int(text, 16)
        except (TypeError, ValueError):
            raise InvalidArgument('Tag %r is not hexadecimal' % (text,), field='tag')
        return cls(value, int(width), int(offset))


@dataclass(frozen=True)
class LedgerEntry:
    offset: int
    n_bits: int
    purpose: str


class AuthKeyPool:
    """
    Reservoir of shared secret bits with a consumed-prefix marker.

    Parameters
    ----------
    bits : sequence of 0/1
        Pre-shared key.
    tag_width : int
        8, 16, 32 or 64.
    epoch_messages : int
        Messages per polynomial key.
    """

    def __init__(self, bits, tag_width=DEFAULT_TAG_WIDTH, epoch_messages=64):
        _check_width(tag_width)
        if epoch_messages < 1:
            raise InvalidArgument('epoch_messages must be >= 1', field='epoch_messages')
        self._bits = np.array(bits, dtype=np.int8).reshape(-1)
        if np.any((self._bits != 0) & (self._bits != 1)):
            raise InvalidArgument('Pool bits must be 0 or 1', field='bits')
        self.tag_width = tag_width
        self.epoch_messages = epoch_messages
        self.offset = 0
        self.ledger = []
        self._hash_key = None
        self._epoch_left = 0

    def __len__(self):
        return len(self._bits)

    @property
    def available(self):
        return len(self._bits) - self.offset

    def cost_of_next(self):
        """Bits the next tag or verification will consume."""
        cost = self.tag_width
        if self._epoch_left == 0:
            cost += 2 * self.tag_width
        return cost

    def _draw(self, n, purpose):
        value = _bits_to_int(self._bits[self.offset:self.offset + n])
        self.ledger.append(LedgerEntry(self.offset, n, purpose))
        self.offset += n
        return value

    def next_material(self):
        """Hash key and mask for one message."""
        if self.available < self.cost_of_next():
            raise KeyExhaustedError('Authentication pool needs %d bits, %d left'
                                    % (self.cost_of_next(), self.available))
        if self._epoch_left == 0:
            self._hash_key = self._draw(2 * self.tag_width, 'hash_key') % PRIMES[self.tag_width]
            self._epoch_left = self.epoch_messages
        self._epoch_left -= 1
        return self._hash_key, self._draw(self.tag_width, 'mask')

    def extend(self, bits):
        self._bits = np.concatenate([self._bits, np.asarray(bits, dtype=np.int8)])

    def audit(self):
        """True when the ledger accounts for every consumed bit, in order."""
        position = 0
        for entry in self.ledger:
            if entry.offset != position:
                return False
            position += entry.n_bits
        return position == self.offset and self.offset <= len(self._bits)

    def to_dict(self):
        return {
            'length': len(self._bits),
            'offset': self.offset,
            'tag_width': self.tag_width,
            'ledger': [[e.offset, e.n_bits, e.purpose] for e in self.ledger],
        }


def tag_message(pool, msg):
    """
    Tag `msg` with fresh pool material.

    Returns
    -------
    (Tag, int)
        The tag and the number of pool bits it consumed.

    Raises
    ------
    KeyExhaustedError
        Before consuming anything, when the pool is too short.
    """
    start = pool.offset
    key, mask = pool.next_material()
    value = poly_hash(key, msg, pool.tag_width) ^ mask
    return Tag(value, pool.tag_width, start), pool.offset - start


def verify(pool, msg, tag):
    """
    Check `tag` against the receiver's synchronized pool.

    A tag made at an offset the pool has already passed is stale (a replay)
    and is rejected without consuming anything. A tag from ahead of the pool
    means the two pools drifted apart, which is not a forgery but a broken
    protocol, and raises DesyncError. Otherwise the material is consumed
    whether the tag matches or not.
    """
    if tag.offset < pool.offset:
        LOGGER.warning('Rejecting tag for offset %d, pool already at %d', tag.offset, pool.offset)
        return False
    if tag.offset > pool.offset:
        raise DesyncError('Tag made at offset %d, receiver pool at %d' % (tag.offset, pool.offset))
    key, mask = pool.next_material()
    if tag.width != pool.tag_width:
        return False
    return (poly_hash(key, msg, pool.tag_width) ^ mask) == tag.value


def replenish(pool, fresh):
    """
    Move bits from a bb84 key into the pool.

    Parameters
    ----------
    pool : AuthKeyPool
    fresh : SecretKey or KeySegment
        A SecretKey gives up all its unused bits. Bits already used
        elsewhere raise DoubleSpendError.

    Returns
    -------
    int
        Bits added.
    """
    if isinstance(fresh, KeySegment):
        bits = fresh.consume('auth_pool')
    elif isinstance(fresh, SecretKey):
        bits = fresh.take(fresh.available, 'auth_pool')
    else:
        raise InvalidArgument('Replenish from a SecretKey or KeySegment', field='fresh')
    pool.extend(bits)
    LOGGER.debug('Authentication pool extended by %d bits to %d', len(bits), len(pool))
    return len(bits)


class AuthenticatedLink(PublicLink):
    """
    Public link whose messages carry a tag.

    The envelope on the wire is ``{"body", "tag", "offset"}``. A message
    that is suppressed, garbled, fails its tag or arrives with a rewritten
    offset ends the discussion with CommunicationsSuppressed. Pools that are
    already out of step before a message is tagged raise DesyncError.

    Parameters
    ----------
    log : ClassicalChannelLog
    pools : dict
        Party name -> that party's AuthKeyPool. Exactly two parties.
    """

    def __init__(self, log, pools):
        super().__init__(log)
        if len(pools) != 2:
            raise InvalidArgument('An authenticated link joins exactly two parties', field='pools')
        self.pools = dict(pools)
        self.rejected = 0

    def _receiver(self, sender):
        return next(party for party in self.pools if party != sender)

    def send(self, sender, body):
        receiver = self._receiver(sender)
        if self.pools[sender].offset != self.pools[receiver].offset:
            raise DesyncError('%s pool at offset %d, %s pool at %d'
                              % (sender, self.pools[sender].offset,
                                 receiver, self.pools[receiver].offset))
        tag, _ = tag_message(self.pools[sender], encode_message(body))
        envelope = {'body': body, 'tag': tag.hex, 'offset': tag.offset}
        message = publish(self.log, sender, encode_message(envelope))
        if message.delivered is None:
            raise CommunicationsSuppressed('Message %d from %s was suppressed' % (message.seq, sender))
        try:
            received = json.loads(message.delivered)
            tag = Tag.from_hex(received['tag'], tag.width, received['offset'])
            body = received['body']
            accepted = verify(self.pools[receiver], encode_message(body), tag)
        except (ValueError, KeyError, TypeError, DesyncError) as exc:
            self.rejected += 1
            raise CommunicationsSuppressed('Message %d from %s unusable: %s' % (message.seq, sender, exc))
        if not accepted:
            self.rejected += 1
            raise CommunicationsSuppressed('Message %d from %s failed authentication' % (message.seq, sender))
        return body


def shared_pools(bits, parties=('alice', 'bob'), tag_width=DEFAULT_TAG_WIDTH, epoch_messages=64):
    """Identical pools for both parties from one pre-shared key."""
    return {party: AuthKeyPool(bits, tag_width, epoch_messages) for party in parties}
