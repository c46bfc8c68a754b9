# -*- coding: utf-8 -*-
"""
eve.py contains eavesdropping strategies for the quantum channel and the
estimator of what a strategy learns (b, expected bits of information per
sifted bit) against what it disturbs (d, disagreement rate on the sifted bits
Alice and Bob keep).

Strategies reach photons only through ``quantum.measure_photon``; there is no
way to read amplitudes or to copy a photon. Only the shipped strategies are
checked against the tradeoff bound d >= b/2; nothing here says anything about
measurements that are not implemented.
"""

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np

from Q_CRYPTO.bb84 import BASES, encode, run_session
from Q_CRYPTO.channels import QuantumChannelConfig
from Q_CRYPTO.exceptions import InvalidArgument
from Q_CRYPTO.quantum import Basis, measure_photon, outcome_probabilities

LOGGER = logging.getLogger(__name__)

LOW_CONFIDENCE_PULSES = 10_000


@dataclass(frozen=True)
class InterceptRecord:
    index: int
    basis: Basis
    outcome: int


class EveStrategy:
    """
    Base strategy: lets every photon through untouched.

    Subclasses override ``intercept``. `records` maps pulse index to the
    InterceptRecord of what was measured, for the current session only.
    """
    name = 'none'

    def __init__(self):
        self.records = {}

    def reset(self):
        self.records = {}

    def intercept(self, index, photon, rng):
        return photon, None


class InterceptResend(EveStrategy):
    """
    Measure the photon and forward the post-measurement state.

    Parameters
    ----------
    basis_rule : str or Basis or float
        'rectilinear', 'diagonal', 'random' (uniform over the two protocol
        bases per pulse), a Basis, or a float angle in radians.
    fraction : float
        Chance of intercepting any given pulse. Below 1 this is a weaker
        attack than the one the protocol analysis assumes.
    """

    def __init__(self, basis_rule='rectilinear', fraction=1.0):
        super().__init__()
        if not 0.0 <= fraction <= 1.0:
            raise InvalidArgument('Interception fraction must be in [0, 1]', field='eve')
        self.fraction = float(fraction)
        self.random_basis = False
        if isinstance(basis_rule, Basis):
            self.basis = basis_rule
            label = basis_rule.name
        elif basis_rule == 'random':
            self.basis = None
            self.random_basis = True
            label = 'random'
        elif basis_rule in ('rectilinear', 'diagonal'):
            self.basis = BASES[0 if basis_rule == 'rectilinear' else 1]
            label = basis_rule
        elif isinstance(basis_rule, (int, float)) and not isinstance(basis_rule, bool):
            self.basis = Basis.angle(float(basis_rule))
            label = 'angle:%.6f' % float(basis_rule)
        else:
            raise InvalidArgument('Unknown interception basis rule %r' % (basis_rule,), field='eve')
        self.name = 'intercept-' + label
        if self.fraction < 1.0:
            self.name += '@%g' % self.fraction

    def choose_basis(self, rng):
        if self.random_basis:
            return BASES[rng.bit(purpose='eve_basis')]
        return self.basis

    def intercept(self, index, photon, rng):
        if not rng.bernoulli(self.fraction, purpose='eve_intercept'):
            return photon, None
        basis = self.choose_basis(rng)
        k, post = measure_photon(photon, basis, rng, purpose='eve_outcome')
        self.records[index] = InterceptRecord(index, basis, k)
        return post, {'basis': basis.name, 'outcome': int(k)}


def intercept_resend(basis_rule, fraction=1.0):
    return InterceptResend(basis_rule, fraction)


def strategy_from_spec(spec):
    """
    Build a strategy from its command line form.

    'none', 'intercept-rectilinear', 'intercept-diagonal', 'intercept-random'
    or 'intercept-angle:<radians>', optionally followed by '@<fraction>'.
    """
    if spec is None or spec == 'none':
        return EveStrategy()
    if not isinstance(spec, str) or not spec.startswith('intercept-'):
        raise InvalidArgument('Unknown eavesdropper %r' % (spec,), field='eve')
    rule, _, fraction = spec[len('intercept-'):].partition('@')
    try:
        fraction = float(fraction) if fraction else 1.0
        if rule.startswith('angle:'):
            rule = float(rule[len('angle:'):])
    except ValueError:
        raise InvalidArgument('Malformed eavesdropper %r' % (spec,), field='eve')
    if rule not in ('rectilinear', 'diagonal', 'random') and not isinstance(rule, float):
        raise InvalidArgument('Unknown eavesdropper %r' % (spec,), field='eve')
    return InterceptResend(rule, fraction)


def binary_entropy(p):
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    with np.errstate(divide='ignore', invalid='ignore'):
        h = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    return np.nan_to_num(h, nan=0.0)


_GAIN_CACHE = {}


def information_gain(record, alice_basis):
    """
    Shannon information Eve holds on one sifted bit once the basis is public.

    Her posterior on the bit follows from the likelihood of her outcome under
    each encoding in the announced basis, with a uniform prior.
    """
    if record is None:
        return 0.0
    key = (record.basis.name, record.outcome, int(alice_basis))
    if key not in _GAIN_CACHE:
        likelihood = [outcome_probabilities(encode(bit, int(alice_basis)), record.basis)[record.outcome]
                      for bit in (0, 1)]
        p = max(likelihood) / sum(likelihood)
        _GAIN_CACHE[key] = float(1.0 - binary_entropy(p))
    return _GAIN_CACHE[key]


@dataclass
class EveStats:
    strategy: str
    info_bits: float
    disturbance: float
    n_sifted: int
    n_checked: int
    info_radius: float
    disturbance_radius: float
    d_match: float
    d_mismatch: float
    n_match: int
    n_mismatch: int
    low_confidence: bool = False

    @property
    def combined_radius(self):
        return self.info_radius / 2.0 + self.disturbance_radius

    def satisfies_tradeoff(self):
        return self.disturbance >= self.info_bits / 2.0 - self.combined_radius

    def to_dict(self):
        return dataclasses.asdict(self)


def _rate(flags):
    flags = np.asarray(flags, dtype=float)
    if len(flags) == 0:
        return 0.0, 0.0
    p = float(flags.mean())
    return p, 4.0 * np.sqrt(p * (1 - p) / len(flags))


def session_stats(result, strategy):
    """EveStats for one finished bb84 SessionResult."""
    sifted = result.sift
    kept = sifted.bob_kept if sifted is not None else np.array([], dtype=int)
    alice, bob = result.alice, result.bob
    records = getattr(strategy, 'records', {})
    gains = np.array([information_gain(records.get(int(i)), alice.bases[i]) for i in kept])
    info = float(gains.mean()) if len(gains) else 0.0
    info_radius = 4.0 * float(gains.std()) / np.sqrt(len(gains)) if len(gains) else 0.0

    compared = set(result.outcome.compared)
    checked = np.array([i for i in kept if int(i) not in compared], dtype=int)
    wrong = alice.bits[checked] != bob.bits[checked]
    d, d_radius = _rate(wrong)

    match = np.array([int(i) in records and records[int(i)].basis.equivalent(BASES[alice.bases[i]])
                      for i in checked], dtype=bool)
    seen = np.array([int(i) in records for i in checked], dtype=bool)
    d_match, _ = _rate(wrong[match])
    d_mismatch, _ = _rate(wrong[seen & ~match])
    return EveStats(getattr(strategy, 'name', 'none'), info, d, len(kept), len(checked),
                    info_radius, d_radius, d_match, d_mismatch,
                    int(match.sum()), int((seen & ~match).sum()))


def estimate_stats(strategy, n, rng, fraction=1.0 / 3.0, channel=None):
    """
    Run one bb84 session of `n` pulses with `strategy` on the line and measure
    b and d.

    Parameters
    ----------
    strategy : EveStrategy
    n : int
        Pulses; below 10**4 the radii are too wide to mean much and the
        result is flagged low_confidence.
    rng : random source
    fraction : float
        Compare fraction passed to the session; d is measured on the rest.
    channel : QuantumChannelConfig, optional
        Loss and detector settings; its eavesdropper is replaced.

    Returns
    -------
    EveStats
    """
    channel = dataclasses.replace(channel or QuantumChannelConfig(), eavesdropper=strategy)
    result = run_session(n, rng, channel, fraction=fraction)
    stats = session_stats(result, strategy)
    if n < LOW_CONFIDENCE_PULSES:
        LOGGER.warning('Only %d pulses; Eve statistics are low confidence', n)
        stats.low_confidence = True
    return stats
