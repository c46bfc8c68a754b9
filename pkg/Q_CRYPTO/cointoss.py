# -*- coding: utf-8 -*-
"""
cointoss.py contains the four-step coin tossing protocol over the quantum
channel, Bob's two measurement tables, the certificate check Bob runs at the
end, and the ways Alice can try to cheat.

    1. Alice picks one basis and n random bits and sends the photons.
    2. Bob measures each photon in a random basis, fills a rectilinear and a
       diagonal table (with holes where nothing was detected) and guesses
       Alice's basis out loud.
    3. Alice says whether he won and publishes her original bits.
    4. Bob checks them against his two tables.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from Q_CRYPTO.bb84 import BASES, BASIS_LETTERS, basis_index, encode
from Q_CRYPTO.channels import (ClassicalChannelLog, PublicLink, QuantumChannelConfig,
                               Transcript, send_photon)
from Q_CRYPTO.exceptions import CommunicationsSuppressed, InvalidArgument
from Q_CRYPTO.quantum import (Basis, PairRegister, epr_pair, measure_photon,
                              photon_from_angle)

LOGGER = logging.getLogger(__name__)

HOLE = -1
CORRELATION_SIGMAS = 4.0
MIN_CORRELATION_ENTRIES = 20
INTERMEDIATE_ANGLE_DEG = 22.5


class CheatKind(enum.Enum):
    HONEST = 'honest'
    LATE_FABRICATION = 'late'
    MIXED_BASES = 'mixed'
    EPR_ATTACK = 'epr'


@dataclass(frozen=True)
class AliceCheatMode:
    """
    How Alice plays.

    Parameters
    ----------
    kind : CheatKind
    storage_loss : float
        EPR attack only: chance each stored half is lost before she measures.
    angle : float, optional
        Mixed bases only: send photons at this angle (degrees) and the one
        perpendicular to it instead of random rectilinear/diagonal photons.
    """
    kind: CheatKind = CheatKind.HONEST
    storage_loss: float = 0.0
    angle: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.storage_loss <= 1.0:
            raise InvalidArgument('storage_loss must be in [0, 1]', field='cheat')

    @classmethod
    def honest(cls):
        return cls()

    @classmethod
    def late_fabrication(cls):
        return cls(CheatKind.LATE_FABRICATION)

    @classmethod
    def mixed_bases(cls, angle=None):
        return cls(CheatKind.MIXED_BASES, angle=angle)

    @classmethod
    def epr_attack(cls, storage_loss=0.0):
        return cls(CheatKind.EPR_ATTACK, storage_loss=storage_loss)

    @classmethod
    def from_spec(cls, spec):
        """'honest', 'late', 'mixed', 'mixed:<degrees>' or 'epr:<storage loss>'."""
        name, _, arg = str(spec).partition(':')
        try:
            if name == 'honest' and not arg:
                return cls.honest()
            if name == 'late' and not arg:
                return cls.late_fabrication()
            if name == 'mixed':
                return cls.mixed_bases(float(arg) if arg else None)
            if name == 'epr':
                return cls.epr_attack(float(arg) if arg else 0.0)
        except ValueError:
            pass
        raise InvalidArgument('Unknown cheat mode %r' % (spec,), field='cheat')

    @property
    def name(self):
        if self.kind is CheatKind.MIXED_BASES and self.angle is not None:
            return 'mixed:%g' % self.angle
        if self.kind is CheatKind.EPR_ATTACK:
            return 'epr:%g' % self.storage_loss
        return self.kind.value


@dataclass
class TossTables:
    """Bob's results per photon index; HOLE where that table has no entry."""
    rectilinear: np.ndarray
    diagonal: np.ndarray

    @classmethod
    def empty(cls, n):
        return cls(np.full(n, HOLE, dtype=np.int8), np.full(n, HOLE, dtype=np.int8))

    def __len__(self):
        return len(self.rectilinear)

    def table(self, basis):
        return self.rectilinear if basis_index(basis.kind.value) == 0 else self.diagonal

    def record(self, index, basis, bit):
        if self.rectilinear[index] != HOLE or self.diagonal[index] != HOLE:
            raise InvalidArgument('Photon %d already recorded' % index)
        self.table(basis)[index] = bit

    def fill_rate(self, basis):
        return float(np.mean(self.table(basis) != HOLE)) if len(self) else 0.0


class CheckResult(enum.Enum):
    CLEAN = 'clean'
    CHEATING_DETECTED = 'cheating_detected'
    SUPPRESSED = 'suppressed'


@dataclass(frozen=True)
class Verification:
    """
    result : CheckResult
    mismatches : indices where the claimed-basis table contradicts the claim
    correlation : 'pass', 'fail' or 'inconclusive' (fewer than 20 entries)
    agreement : agreement fraction on the other table, None when empty
    m : entries in the other table
    """
    result: CheckResult
    mismatches: tuple = ()
    correlation: str = 'inconclusive'
    agreement: Optional[float] = None
    m: int = 0

    @property
    def clean(self):
        return self.result is CheckResult.CLEAN

    @property
    def evidence(self):
        return self.mismatches


@dataclass(frozen=True)
class TossVerdict:
    winner: Optional[str]
    verification: Verification
    bob_guess: Basis
    claimed_basis: Optional[Basis] = None
    tables: Optional[TossTables] = None


def verify_certificate(claimed_basis, claimed_bits, tables, sigmas=CORRELATION_SIGMAS,
                       min_entries=MIN_CORRELATION_ENTRIES):
    """
    Bob's check of Alice's certificate.

    Every entry of the table for `claimed_basis` must equal the claimed bit
    at its index. On the other table the agreement fraction f over its m
    entries must satisfy |f - 0.5| <= sigmas * sqrt(0.25 / m); with fewer
    than `min_entries` entries that test is inconclusive and does not bind.

    Returns
    -------
    Verification
    """
    claimed_bits = np.asarray(claimed_bits, dtype=np.int8).reshape(-1)
    if len(claimed_bits) != len(tables):
        raise InvalidArgument('Claimed %d bits for %d photons' % (len(claimed_bits), len(tables)),
                              field='claimed_bits')
    own = tables.table(claimed_basis)
    filled = own != HOLE
    mismatches = tuple(np.flatnonzero(filled & (own != claimed_bits)).tolist())

    other = tables.table(claimed_basis.conjugate())
    other_filled = other != HOLE
    m = int(other_filled.sum())
    agreement = float(np.mean(other[other_filled] == claimed_bits[other_filled])) if m else None
    if m < min_entries:
        correlation = 'inconclusive'
    elif abs(agreement - 0.5) <= sigmas * np.sqrt(0.25 / m):
        correlation = 'pass'
    else:
        correlation = 'fail'

    if mismatches or correlation == 'fail':
        result = CheckResult.CHEATING_DETECTED
    else:
        result = CheckResult.CLEAN
    return Verification(result, mismatches, correlation, agreement, m)


@dataclass
class RoundState:
    """What exists once the photons are out and Bob has guessed, before Alice reveals."""
    n: int
    mode: AliceCheatMode
    rng: object
    photons: list
    alice_bits: Optional[np.ndarray] = None
    alice_basis: Optional[Basis] = None
    photon_bases: list = field(default_factory=list)
    stored: list = field(default_factory=list)
    deliveries: list = field(default_factory=list)
    bob_bases: Optional[np.ndarray] = None
    tables: Optional[TossTables] = None
    bob_guess: Optional[Basis] = None
    heard_guess: Optional[Basis] = None


def _alice_send(n, mode, rng):
    """Prepare the photon train according to Alice's plan."""
    state = RoundState(n, mode, rng, photons=[])
    if mode.kind is CheatKind.EPR_ATTACK:
        for _ in range(n):
            mine, theirs = PairRegister(epr_pair()).split()
            state.stored.append(mine)
            state.photons.append(theirs)
        state.photon_bases = ['EPR'] * n
        return state
    if mode.kind is CheatKind.MIXED_BASES:
        state.alice_bits = rng.bits(n, purpose='alice_bit')
        if mode.angle is None:
            bases = rng.bits(n, purpose='alice_basis')
            state.photons = [encode(b, k) for b, k in zip(state.alice_bits, bases)]
            state.photon_bases = [BASIS_LETTERS[k] for k in bases]
        else:
            theta = np.deg2rad(mode.angle)
            state.photons = [photon_from_angle(theta + b * np.pi / 2) for b in state.alice_bits]
            state.photon_bases = [Basis.angle(theta).name] * n
        return state
    state.alice_basis = BASES[rng.bit(purpose='alice_basis')]
    state.alice_bits = rng.bits(n, purpose='alice_bit')
    state.photons = [encode(b, state.alice_basis) for b in state.alice_bits]
    state.photon_bases = [BASIS_LETTERS[basis_index(state.alice_basis.kind.value)]] * n
    return state


def _bob_measure(state):
    state.tables = TossTables.empty(state.n)
    for i, delivery in enumerate(state.deliveries):
        if delivery.detected:
            basis = BASES[state.bob_bases[i]]
            k, _ = measure_photon(delivery.photon, basis, state.rng, purpose='bob_outcome')
            state.tables.record(i, basis, k)


def alice_late_fabrication(state):
    """
    Alice lost honestly and now claims the other basis with bits she makes
    up; she cannot see Bob's tables, so the bits are uniform.

    Returns
    -------
    (Basis, numpy.ndarray)
    """
    return state.heard_guess.conjugate(), state.rng.bits(state.n, purpose='alice_fabricate')


def alice_mixed_bases(state):
    """Alice sent no single basis, so she claims whichever one beats the guess."""
    return state.heard_guess.conjugate(), np.array(state.alice_bits, dtype=np.int8)


def alice_epr_attack(storage_loss, state):
    """
    Alice measures her stored halves in the basis opposite to the guess she
    heard and publishes the complement of each result, which is what Bob's
    photon would show in that basis. Halves lost in storage are replaced by
    guesses.
    """
    claim = state.heard_guess.conjugate()
    bits = np.empty(state.n, dtype=np.int8)
    for i, half in enumerate(state.stored):
        if state.rng.bernoulli(storage_loss, purpose='storage'):
            bits[i] = state.rng.bit(purpose='alice_guess')
        else:
            k, _ = measure_photon(half, claim, state.rng, purpose='alice_outcome')
            bits[i] = 1 - k
    return claim, bits


def _alice_certify(state):
    mode = state.mode
    if mode.kind is CheatKind.EPR_ATTACK:
        return alice_epr_attack(mode.storage_loss, state)
    if mode.kind is CheatKind.MIXED_BASES:
        return alice_mixed_bases(state)
    if mode.kind is CheatKind.LATE_FABRICATION and state.heard_guess.equivalent(state.alice_basis):
        return alice_late_fabrication(state)
    return state.alice_basis, np.array(state.alice_bits, dtype=np.int8)


def _pulse_records(state):
    records = []
    for i, delivery in enumerate(state.deliveries):
        event = delivery.event
        records.append({
            'index': i,
            'fate': event.fate.value,
            'detected': bool(event.detected),
            'alice_basis': state.photon_bases[i],
            'alice_bit': None if state.alice_bits is None else int(state.alice_bits[i]),
            'bob_basis': BASIS_LETTERS[state.bob_bases[i]],
            'bob_bit': (None if not event.detected
                        else int(max(state.tables.rectilinear[i], state.tables.diagonal[i]))),
            'eve': event.details,
        })
    return records


def toss_round(n=1000, alice_mode=None, rng=None, channel=None, bob_delay=False, link=None):
    """
    Play one coin toss.

    Parameters
    ----------
    n : int
        Photons Alice sends.
    alice_mode : AliceCheatMode, optional
        Honest by default.
    rng : random source
    channel : QuantumChannelConfig, optional
    bob_delay : bool
        Bob keeps his photons unmeasured until after his guess (and after
        Alice has answered), instead of measuring them as they arrive.
    link : PublicLink, optional
        Pass an ``auth.AuthenticatedLink`` to authenticate Bob's guess and Alice's reply.

    Returns
    -------
    (TossVerdict, Transcript)
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument('Number of photons must be >= 1, got %r' % (n,), field='n')
    if rng is None:
        raise InvalidArgument('toss_round needs a random source', field='rng')
    mode = alice_mode or AliceCheatMode.honest()
    channel = channel or QuantumChannelConfig()
    link = link or PublicLink(ClassicalChannelLog())

    state = _alice_send(n, mode, rng)
    state.deliveries = [send_photon(channel, photon, rng, index=i)
                        for i, photon in enumerate(state.photons)]
    state.bob_bases = rng.bits(n, purpose='bob_basis')
    if not bob_delay:
        _bob_measure(state)
    state.bob_guess = BASES[rng.bit(purpose='bob_guess')]
    letter = BASIS_LETTERS[basis_index(state.bob_guess.kind.value)]

    claimed_basis = None
    try:
        heard = link.send('bob', {'type': 'guess', 'basis': letter})
        # Alice acts on what the link delivered; Bob judges by his own guess
        state.heard_guess = BASES[basis_index(heard['basis'])]
        claimed_basis, claimed_bits = _alice_certify(state)
        bob_won = claimed_basis.equivalent(state.heard_guess)
        received = link.send('alice', {
            'type': 'certify',
            'result': 'bob' if bob_won else 'alice',
            'basis': BASIS_LETTERS[basis_index(claimed_basis.kind.value)],
            'bits': claimed_bits.tolist(),
        })
        if bob_delay:
            _bob_measure(state)
        announced = BASES[basis_index(received['basis'])]
        verification = verify_certificate(announced, received['bits'], state.tables)
        winner = 'bob' if announced.equivalent(state.bob_guess) else 'alice'
    except CommunicationsSuppressed as exc:
        LOGGER.warning('Coin toss aborted, public discussion suppressed: %s', exc)
        if state.tables is None:
            _bob_measure(state)
        verification = Verification(CheckResult.SUPPRESSED)
        winner = None

    if mode.kind is CheatKind.HONEST and verification.mismatches:
        LOGGER.error('Honest round produced mismatches at %s', list(verification.mismatches))
    verdict = TossVerdict(winner, verification, state.bob_guess, claimed_basis, state.tables)
    return verdict, Transcript(_pulse_records(state), link.log)


def round_summary(verdict, mode, n):
    """Flat summary of one round, as written to reports."""
    tables = verdict.tables
    verification = verdict.verification
    return {
        'n': int(n),
        'alice_mode': mode.name,
        'bob_guess': verdict.bob_guess.name,
        'claimed_basis': None if verdict.claimed_basis is None else verdict.claimed_basis.name,
        'winner': verdict.winner,
        'verification': verification.result.value,
        'mismatch_indices': list(verification.mismatches),
        'correlation': verification.correlation,
        'agreement': verification.agreement,
        'rect_fill': tables.fill_rate(BASES[0]),
        'diag_fill': tables.fill_rate(BASES[1]),
    }
