# -*- coding: utf-8 -*-
"""
Main.py contains the experiment layer of Q_CRYPTO: a Simulation holds named
Scenarios, each an ExperimentConfig whose trials are run into a per-trial
DataFrame plus aggregates (means and 4-sigma radii). The same machinery backs
the ``qcrypto`` command line, the report writers, and the replays of the two
worked example tables bundled under ``Q_CRYPTO/tables``.
"""

import argparse
import configparser
import dataclasses
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from Q_CRYPTO.auth import PRIMES, AuthenticatedLink, replenish, shared_pools
from Q_CRYPTO.bb84 import BASIS_LETTERS, basis_index, run_session
from Q_CRYPTO.channels import (ClassicalChannelLog, PublicLink, QuantumChannelConfig,
                               scripted_rng, seeded_rng, substitution_rule,
                               suppression_rule)
from Q_CRYPTO.cointoss import AliceCheatMode, CheatKind, round_summary, toss_round
from Q_CRYPTO.eve import session_stats, strategy_from_spec
from Q_CRYPTO.exceptions import FixtureError, InvalidArgument, ScriptError

LOGGER = logging.getLogger(__name__)

TABLES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'tables')
PRECISION = 6

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_IO = 3

BB84_METRICS = ['n_detected', 'n_sifted', 'n_compared', 'n_disagree', 'key_length',
                'pad_bits', 'qber', 'sift_rate', 'detection_rate', 'rejected',
                'suppressed', 'eve_b', 'eve_d', 'auth_consumed', 'auth_replenished',
                'invariant_ok']
COINTOSS_METRICS = ['alice_win', 'bob_win', 'clean', 'cheat_detected', 'suppressed',
                    'n_mismatch', 'agreement', 'rect_fill', 'diag_fill', 'invariant_ok']


def _fieldReferences(keyword):
    '''
    Description and unit of a report column.

    Parameters
    ----------
    keyword : str
        Column of a trials table or metric of an aggregates table.

    Returns
    -------
    (description, unit) : tuple of str
    '''

    references = {
        'trial': ('trial index, also the per-trial seed stream', ''),
        'seed': ('base seed of the experiment', ''),
        'n_sent': ('pulses sent by Alice', 'pulses'),
        'n_detected': ('pulses Bob detected', 'pulses'),
        'n_sifted': ('pulses kept after basis discussion', 'pulses'),
        'n_compared': ('sifted bits revealed to detect eavesdropping', 'bits'),
        'n_disagree': ('revealed bits that disagreed', 'bits'),
        'verdict': ('accepted, rejected or suppressed', ''),
        'key_length': ('bits left as shared secret key', 'bits'),
        'pad_bits': ('key bits left for one-time pads after replenishing authentication', 'bits'),
        'qber': ('disagreement rate over all sifted bits', 'fraction'),
        'qber_radius': ('4-sigma binomial radius of qber within the trial', 'fraction'),
        'sift_rate': ('sifted / detected', 'fraction'),
        'detection_rate': ('detected / sent', 'fraction'),
        'rejected': ('session rejected for disagreement', '0/1'),
        'suppressed': ('public discussion suppressed or failed authentication', '0/1'),
        'eve': ('eavesdropping strategy', ''),
        'eve_b': ('Eve information per sifted bit', 'bits'),
        'eve_b_radius': ('4-sigma radius of eve_b within the trial', 'bits'),
        'eve_d': ('disagreement rate on sifted bits that were not revealed', 'fraction'),
        'eve_d_radius': ('4-sigma radius of eve_d within the trial', 'fraction'),
        'auth_consumed': ('authentication pool bits used by one party', 'bits'),
        'auth_replenished': ('key bits moved into each authentication pool', 'bits'),
        'invariant_ok': ('no protocol invariant was broken', '0/1'),
        'n': ('photons sent by Alice', 'photons'),
        'alice_mode': ('how Alice played', ''),
        'bob_guess': ('basis Bob guessed', ''),
        'claimed_basis': ('basis Alice certified', ''),
        'winner': ('who won the toss', ''),
        'alice_win': ('Alice won', '0/1'),
        'bob_win': ('Bob won', '0/1'),
        'clean': ('certificate verified clean', '0/1'),
        'cheat_detected': ('certificate exposed cheating', '0/1'),
        'n_mismatch': ('claimed-basis table entries contradicting the claim', 'entries'),
        'correlation': ('pass, fail or inconclusive', ''),
        'agreement': ('agreement of the claim with the other table', 'fraction'),
        'rect_fill': ('filled share of the rectilinear table', 'fraction'),
        'diag_fill': ('filled share of the diagonal table', 'fraction'),
    }
    if keyword not in references:
        raise InvalidArgument('No reference for column %r, choose one of %s'
                              % (keyword, sorted(references)), field='keyword')
    return references[keyword]


@dataclass
class ExperimentConfig:
    """
    Everything one experiment needs; validated on construction.

    Parameters
    ----------
    protocol : 'bb84' or 'cointoss'
    n : pulses (bb84) or photons (cointoss) per trial
    trials : number of independent sessions or rounds
    seed : base seed in [0, 2**64); trial t runs on stream (seed, t)
    loss, efficiency : quantum channel transit loss and detector efficiency
    eve : eavesdropper spec, see ``eve.strategy_from_spec``
    compare_fraction : bb84 share of sifted bits revealed
    cheat : coin toss cheat spec, see ``AliceCheatMode.from_spec``
    auth : authenticate the public discussion
    output : 'json', 'csv' or 'text'
    transcript : optional JSON-lines transcript path
    tamper : 'none', 'substitute' or 'suppress' active adversary
    auth_pool : initial shared authentication key, in bits
    tag_width : authentication tag width in bits
    bob_delay : coin toss Bob measures after his guess
    workers : parallel trial processes
    """
    protocol: str = 'bb84'
    n: int = 1000
    trials: int = 1
    seed: int = 1
    loss: float = 0.0
    efficiency: float = 1.0
    eve: str = 'none'
    compare_fraction: float = 1.0 / 3.0
    cheat: str = 'honest'
    auth: bool = False
    output: str = 'json'
    transcript: Optional[str] = None
    tamper: str = 'none'
    auth_pool: int = 1024
    tag_width: int = 32
    bob_delay: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.protocol not in ('bb84', 'cointoss'):
            raise InvalidArgument('protocol must be bb84 or cointoss', field='protocol')
        for name, low in (('n', 1), ('trials', 1), ('workers', 1), ('auth_pool', 0)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < low:
                raise InvalidArgument('%s must be an integer >= %d' % (name, low), field=name)
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < 2 ** 64:
            raise InvalidArgument('seed must be an integer in [0, 2**64)', field='seed')
        for name in ('loss', 'efficiency', 'compare_fraction'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0):
                raise InvalidArgument('%s must be in [0, 1]' % name, field=name)
        if self.output not in ('json', 'csv', 'text'):
            raise InvalidArgument('output must be json, csv or text', field='output')
        if self.tamper not in ('none', 'substitute', 'suppress'):
            raise InvalidArgument('tamper must be none, substitute or suppress', field='tamper')
        if self.tag_width not in PRIMES:
            raise InvalidArgument('tag_width must be one of %s' % sorted(PRIMES), field='tag_width')
        if self.auth and self.auth_pool < 6 * self.tag_width:
            raise InvalidArgument('auth_pool must hold at least %d bits for one session'
                                  % (6 * self.tag_width), field='auth_pool')
        strategy_from_spec(self.eve)
        AliceCheatMode.from_spec(self.cheat)

    def to_dict(self):
        return dataclasses.asdict(self)


def _tamper_rule(name):
    return {'none': None, 'substitute': substitution_rule(), 'suppress': suppression_rule()}[name]


def _link(config, rng):
    log = ClassicalChannelLog(tamper=_tamper_rule(config.tamper))
    if not config.auth:
        return log, PublicLink(log), None
    pools = shared_pools(rng.bits(config.auth_pool, purpose='preshared_key'),
                         tag_width=config.tag_width)
    return log, AuthenticatedLink(log, pools), pools


def _bb84_trial(config, trial, rng, record):
    strategy = strategy_from_spec(config.eve)
    channel = QuantumChannelConfig(config.loss, config.efficiency,
                                   None if config.eve == 'none' else strategy)
    _, link, pools = _link(config, rng)
    result = run_session(config.n, rng, channel, fraction=config.compare_fraction,
                         link=link, seed=config.seed, record=record)
    summary = result.summary
    outcome = result.outcome

    consumed = replenished = 0
    if pools is not None:
        consumed = pools['alice'].offset
        if outcome.accepted:
            replenished = min(consumed, outcome.alice_key.available)
            replenish(pools['alice'], outcome.alice_key.segment(0, replenished))
            replenish(pools['bob'], outcome.bob_key.segment(0, replenished))

    invariant_ok = summary['invariant_ok']
    if outcome.accepted and config.auth and \
            not np.array_equal(outcome.alice_key.bits, outcome.bob_key.bits):
        LOGGER.error('Trial %d: authenticated session accepted mismatched keys', trial)
        invariant_ok = False
    if config.eve == 'none' and config.tamper == 'none' and summary['qber'] != 0.0:
        LOGGER.error('Trial %d: errors on an unobserved channel', trial)
        invariant_ok = False

    stats = session_stats(result, strategy)
    n_sifted = summary['n_sifted']
    qber = summary['qber']
    row = {
        'trial': trial,
        'seed': config.seed,
        'n_sent': summary['n_sent'],
        'n_detected': summary['n_detected'],
        'n_sifted': n_sifted,
        'n_compared': summary['n_compared'],
        'n_disagree': summary['n_disagree'],
        'verdict': summary['verdict'],
        'key_length': summary['key_length'],
        'pad_bits': summary['key_length'] - replenished,
        'qber': qber,
        'qber_radius': 4.0 * math.sqrt(qber * (1 - qber) / n_sifted) if n_sifted else 0.0,
        'sift_rate': summary['sift_rate'],
        'detection_rate': summary['n_detected'] / summary['n_sent'],
        'rejected': int(summary['verdict'] == 'rejected'),
        'suppressed': int(summary['verdict'] == 'suppressed'),
        'eve': summary['eve'],
        'eve_b': stats.info_bits,
        'eve_b_radius': stats.info_radius,
        'eve_d': stats.disturbance,
        'eve_d_radius': stats.disturbance_radius,
        'auth_consumed': consumed,
        'auth_replenished': replenished,
        'invariant_ok': int(invariant_ok),
    }
    records = result.transcript.to_records(trial) if record else None
    return row, records


def _cointoss_trial(config, trial, rng, record):
    mode = AliceCheatMode.from_spec(config.cheat)
    eve = None if config.eve == 'none' else strategy_from_spec(config.eve)
    channel = QuantumChannelConfig(config.loss, config.efficiency, eve)
    _, link, _ = _link(config, rng)
    verdict, transcript = toss_round(config.n, mode, rng, channel,
                                     bob_delay=config.bob_delay, link=link)
    summary = round_summary(verdict, mode, config.n)
    mismatches = summary['mismatch_indices']
    invariant_ok = not (mode.kind is CheatKind.HONEST and eve is None
                        and config.tamper == 'none' and mismatches)
    row = {
        'trial': trial,
        'seed': config.seed,
        'n': config.n,
        'alice_mode': summary['alice_mode'],
        'bob_guess': summary['bob_guess'],
        'claimed_basis': summary['claimed_basis'],
        'winner': summary['winner'],
        'alice_win': int(summary['winner'] == 'alice'),
        'bob_win': int(summary['winner'] == 'bob'),
        'clean': int(summary['verification'] == 'clean'),
        'cheat_detected': int(summary['verification'] == 'cheating_detected'),
        'suppressed': int(summary['verification'] == 'suppressed'),
        'n_mismatch': len(mismatches),
        'correlation': summary['correlation'],
        'agreement': np.nan if summary['agreement'] is None else summary['agreement'],
        'rect_fill': summary['rect_fill'],
        'diag_fill': summary['diag_fill'],
        'invariant_ok': int(invariant_ok),
    }
    records = transcript.to_records(trial) if record else None
    return row, records


def run_trial(config, trial):
    """
    One trial on its own random stream (config.seed, trial).

    Returns
    -------
    (dict, list or None)
        The trial row and, when a transcript was asked for, its records.
    """
    rng = seeded_rng(config.seed, trial)
    record = config.transcript is not None
    if config.protocol == 'bb84':
        return _bb84_trial(config, trial, rng, record)
    return _cointoss_trial(config, trial, rng, record)


def _aggregate(trials, metrics):
    rows = {}
    for metric in metrics:
        values = pd.to_numeric(trials[metric], errors='coerce').dropna()
        count = len(values)
        mean = float(values.mean()) if count else np.nan
        if count > 1:
            radius = 4.0 * float(values.std(ddof=1)) / math.sqrt(count)
        elif count == 1 and metric + '_radius' in trials:
            radius = float(trials[metric + '_radius'].iloc[0])
        else:
            radius = np.nan
        rows[metric] = {'mean': mean, 'radius': radius, 'count': count}
    return pd.DataFrame.from_dict(rows, orient='index', columns=['mean', 'radius', 'count'])


def _clean(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else round(float(value), PRECISION)
    return value


@dataclass
class StatsReport:
    """
    Per-trial rows and their aggregates for one experiment.

    Aggregates are recomputed from `trials` on construction, so the two
    cannot drift apart.
    """
    config: ExperimentConfig
    trials: pd.DataFrame
    aggregates: pd.DataFrame = field(default=None)

    def __post_init__(self):
        metrics = BB84_METRICS if self.config.protocol == 'bb84' else COINTOSS_METRICS
        self.aggregates = _aggregate(self.trials, metrics)

    @property
    def invariant_violations(self):
        return int((self.trials['invariant_ok'] == 0).sum())

    def aggregate(self, metric):
        """(mean, 4-sigma radius) of one metric."""
        row = self.aggregates.loc[metric]
        return row['mean'], row['radius']

    def to_dict(self):
        return {
            'config': self.config.to_dict(),
            'trials': [{k: _clean(v) for k, v in row.items()}
                       for row in self.trials.to_dict(orient='records')],
            'aggregates': {metric: {k: _clean(v) for k, v in row.items()}
                           for metric, row in self.aggregates.to_dict(orient='index').items()},
            'invariant_violations': self.invariant_violations,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + '\n'

    def to_csv(self):
        """Trial rows followed by a 'mean' and a 'radius' row."""
        extra = pd.DataFrame([dict(self.aggregates[stat], trial=stat) for stat in ('mean', 'radius')])
        frame = pd.concat([self.trials, extra], ignore_index=True)
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format='%.' + str(PRECISION) + 'f')
        return buffer.getvalue()

    def to_text(self):
        config = self.config
        lines = ['Q_CRYPTO %s: n=%d trials=%d seed=%d' % (config.protocol, config.n,
                                                         config.trials, config.seed)]
        for metric, row in self.aggregates.iterrows():
            description, unit = _fieldReferences(metric)
            lines.append('%-18s %12.*f +/- %-10.*f %s%s' % (
                metric, PRECISION, row['mean'], PRECISION, row['radius'], description,
                ' [%s]' % unit if unit else ''))
        lines.append('invariant violations: %d' % self.invariant_violations)
        return '\n'.join(lines) + '\n'

    def render(self, fmt=None):
        fmt = fmt or self.config.output
        return {'json': self.to_json, 'csv': self.to_csv, 'text': self.to_text}[fmt]()


def run(config, quiet=True):
    """
    Run every trial of `config`.

    Trials run on independent streams derived from (seed, trial), so the
    result does not depend on `workers` or on the order trials finish in.
    Writes the transcript when ``config.transcript`` is set.

    Returns
    -------
    StatsReport
    """
    progress = dict(total=config.trials, desc=config.protocol, disable=quiet, file=sys.stderr)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            results = list(tqdm(executor.map(run_trial, repeat(config), range(config.trials)),
                                **progress))
    else:
        results = [run_trial(config, trial) for trial in tqdm(range(config.trials), **progress)]

    if config.transcript is not None:
        with open(config.transcript, 'w', encoding='utf-8') as handle:
            for _, records in results:
                for record in records:
                    handle.write(json.dumps(record, sort_keys=True) + '\n')

    report = StatsReport(config, pd.DataFrame([row for row, _ in results]))
    if report.invariant_violations:
        LOGGER.error('%d trial(s) broke an invariant', report.invariant_violations)
    return report


class Simulation:
    """
    Named collection of experiment scenarios.

    Parameters
    ----------
    name : str, optional
        Label of the simulation.

    Methods
    -------
    createScenario : add a scenario from a config and field overrides
    calculateTrials : run every scenario
    scenarioComparison : one aggregate across all scenarios
    """

    def __init__(self, name=None):
        self.name = name or 'Simulation'
        self.scenario = {}

    def createScenario(self, name, config=None, **fields):
        self.scenario[name] = Scenario(name, config, **fields)
        return self.scenario[name]

    def calculateTrials(self, quiet=True):
        for name, scen in self.scenario.items():
            LOGGER.info('Working on Scenario: %s', name)
            scen.calculateTrials(quiet=quiet)

    def scenarioComparison(self, keyword=None):
        '''
        Mean and 4-sigma radius of one aggregate metric in every scenario.

        Parameters
        ----------
        keyword : str
            Metric name, e.g. 'qber' or 'alice_win'.

        Returns
        -------
        pandas.DataFrame
            Indexed by scenario name, columns mean, radius, count.
        '''
        done = {name: scen for name, scen in self.scenario.items() if scen.aggregates is not None}
        if not done:
            raise InvalidArgument('No scenario has been calculated yet')
        if keyword is None or any(keyword not in scen.aggregates.index for scen in done.values()):
            keys = list(next(iter(done.values())).aggregates.index)
            raise InvalidArgument('Choose one of the keywords: %s' % keys, field='keyword')
        return pd.DataFrame({name: scen.aggregates.loc[keyword] for name, scen in done.items()}).T


class Scenario:

    def __init__(self, name, config=None, **fields):
        self.name = name
        self.config = dataclasses.replace(config or ExperimentConfig(), **fields)
        self.report = None
        self.data = None
        self.aggregates = None

    def calculateTrials(self, quiet=True):
        self.report = run(self.config, quiet=quiet)
        self.data = self.report.trials
        self.aggregates = self.report.aggregates
        return self.report

    def __getitem__(self, key):
        return getattr(self, key)


def sens_ParameterSweep(sim, field_name, values, config=None):
    '''
    Adds one scenario per value of a config field to a Simulation.

    Parameters
    ----------
    sim : Simulation
    field_name : str
        Any ExperimentConfig field, e.g. 'loss', 'eve' (to sweep the
        interception fraction with 'intercept-rectilinear@0.25', ...) or
        'compare_fraction'.
    values : iterable
    config : ExperimentConfig, optional
        Base config of every scenario.

    Returns
    -------
    sim : Simulation
    '''
    if field_name not in {f.name for f in dataclasses.fields(ExperimentConfig)}:
        raise InvalidArgument('Unknown config field %r' % (field_name,), field=field_name)
    for value in values:
        sim.createScenario('%s=%s' % (field_name, value), config, **{field_name: value})
    return sim


def read_table(file):
    '''
    Read a replay table: a header line, a description line, then rows.

    Returns
    -------
    data : pandas.DataFrame
        All cells as strings, blank cells as ''.
    meta : dict
        Column name -> description.
    '''
    try:
        csvdata = open(str(file), 'r', encoding='UTF-8-sig')
    except OSError as exc:
        raise FixtureError('Replay table missing: %s (%s)' % (file, exc))
    with csvdata:
        head = csvdata.readline().rstrip('\n').split(',')
        meta = dict(zip(head, csvdata.readline().rstrip('\n').split(',')))
        data = pd.read_csv(csvdata, names=head, dtype=str, keep_default_na=False)
    return data, meta


def _require(data, columns, file):
    missing = [c for c in columns if c not in data.columns]
    if missing or data.empty:
        raise FixtureError('%s lacks columns %s' % (file, missing or columns))


@dataclass
class ReplayResult:
    name: str
    diffs: list = field(default_factory=list)
    error: Optional[str] = None

    @property
    def passed(self):
        return not self.diffs and self.error is None

    def to_dict(self):
        return {'name': self.name, 'passed': self.passed, 'error': self.error,
                'diffs': [list(d) for d in self.diffs]}


def _compare(name, expected, actual, columns, label):
    diffs = []
    for column in columns:
        for i, (want, got) in enumerate(zip(expected[column], actual[column])):
            if str(want) != str(got):
                diffs.append((column, label[i], str(want), str(got)))
    return ReplayResult(name, diffs)


_BB84_COLUMNS = ['pulse', 'alice_bit', 'sending_basis', 'receiving_basis', 'bob_bit',
                 'bob_reports', 'alice_ok', 'shared', 'bob_reveals', 'alice_confirms',
                 'remaining']


def _replay_bb84(file):
    data, _ = read_table(file)
    _require(data, _BB84_COLUMNS, file)
    n = len(data)
    send = [basis_index(b) for b in data['sending_basis']]
    recv = [basis_index(b) for b in data['receiving_basis']]
    detected = [cell != '' for cell in data['bob_bit']]
    kept = [i for i in range(n) if data['alice_ok'][i] == 'OK']
    try:
        reveal = [kept.index(i) for i in range(n) if data['bob_reveals'][i] != '']
    except ValueError:
        raise FixtureError('%s reveals a pulse that was not kept' % file)
    streams = {
        'alice_bit': [int(b) for b in data['alice_bit']],
        'alice_basis': send,
        'detect': detected,
        'bob_basis': recv,
        'bob_outcome': [int(data['bob_bit'][i]) for i in range(n)
                        if detected[i] and send[i] != recv[i]],
        'compare': reveal,
    }
    rng = scripted_rng(streams)
    try:
        result = run_session(n, rng, QuantumChannelConfig(detector_efficiency=0.5))
    except ScriptError as exc:
        return ReplayResult('bb84', error=str(exc))

    messages = [json.loads(m.delivered) for m in result.log]
    actual = {column: [''] * n for column in _BB84_COLUMNS[4:]}
    if len(messages) < 4:
        return ReplayResult('bb84', error='session ended after %d messages' % len(messages))
    bases, ok, reveals, confirm = messages[:4]
    for i, letter in zip(bases['indices'], bases['bases']):
        actual['bob_bit'][i] = str(int(result.bob.bits[i]))
        actual['bob_reports'][i] = letter
    for i in ok['indices']:
        actual['alice_ok'][i] = 'OK'
        actual['shared'][i] = str(int(result.bob.bits[i]))
    for i, b in zip(reveals['indices'], reveals['bits']):
        actual['bob_reveals'][i] = str(b)
        if i not in confirm['disagree']:
            actual['alice_confirms'][i] = 'OK'
    if result.outcome.accepted:
        rest = [i for i in ok['indices'] if i not in reveals['indices']]
        for i, b in zip(rest, result.outcome.bob_key.bits):
            actual['remaining'][i] = str(int(b))

    replay = _compare('bb84', data, actual, _BB84_COLUMNS[4:], data['pulse'].tolist())
    for purpose, left in rng.remaining().items():
        replay.diffs.append(('script', purpose, '0 left', '%d left' % left))
    return replay


_TOSS_COLUMNS = ['photon', 'alice_basis', 'alice_bit', 'photon_sent', 'bob_basis',
                 'rect_table', 'diag_table', 'certify']
_PHOTON_SYMBOLS = {('R', 0): 'H', ('R', 1): 'V', ('D', 0): '/', ('D', 1): '\\'}


def _replay_cointoss(file):
    data, _ = read_table(file)
    _require(data, _TOSS_COLUMNS, file)
    n = len(data)
    bob = [basis_index(b) for b in data['bob_basis']]
    alice_basis = basis_index(data['alice_basis'][0])
    entry = [data['rect_table'][i] if bob[i] == 0 else data['diag_table'][i] for i in range(n)]
    streams = {
        'alice_basis': [alice_basis],
        'alice_bit': [int(b) for b in data['alice_bit']],
        'detect': [cell != '' for cell in entry],
        'bob_basis': bob,
        'bob_outcome': [int(entry[i]) for i in range(n) if entry[i] != '' and bob[i] != alice_basis],
        # Bob's guess is not part of the printed table; any value replays it.
        'bob_guess': [0],
    }
    rng = scripted_rng(streams)
    try:
        verdict, transcript = toss_round(n, AliceCheatMode.honest(), rng,
                                         QuantumChannelConfig(detector_efficiency=0.5))
    except ScriptError as exc:
        return ReplayResult('cointoss', error=str(exc))

    tables = verdict.tables
    letter = BASIS_LETTERS[alice_basis]
    certify = json.loads(transcript.log.messages[-1].delivered)
    actual = {
        'photon_sent': [_PHOTON_SYMBOLS[(letter, int(b))] for b in streams['alice_bit']],
        'rect_table': ['' if v < 0 else str(int(v)) for v in tables.rectilinear],
        'diag_table': ['' if v < 0 else str(int(v)) for v in tables.diagonal],
        'certify': [str(b) for b in certify['bits']],
    }
    replay = _compare('cointoss', data, actual, list(actual), data['photon'].tolist())
    if not verdict.verification.clean:
        replay.diffs.append(('verification', '-', 'clean', verdict.verification.result.value))
    for purpose, left in rng.remaining().items():
        replay.diffs.append(('script', purpose, '0 left', '%d left' % left))
    return replay


def replay_paper_tables(path=None):
    """
    Replay the worked key distribution and coin toss examples with scripted
    randomness and compare every cell of their tables.

    Parameters
    ----------
    path : str, optional
        Directory holding bb84_table.csv and cointoss_table.csv; the bundled
        tables by default.

    Returns
    -------
    dict
        'bb84' and 'cointoss' -> ReplayResult, with (column, position,
        expected, actual) diffs on failure.

    Raises
    ------
    FixtureError
        A table is missing or lacks its columns.
    """
    path = path or TABLES_DIR
    results = {
        'bb84': _replay_bb84(os.path.join(path, 'bb84_table.csv')),
        'cointoss': _replay_cointoss(os.path.join(path, 'cointoss_table.csv')),
    }
    for name, result in results.items():
        if result.passed:
            LOGGER.info('Replay of %s table passed', name)
        else:
            LOGGER.warning('Replay of %s table failed: %s', name, result.error or result.diffs)
    return results


_INT_FIELDS = ('n', 'trials', 'seed', 'auth_pool', 'tag_width', 'workers')
_FLOAT_FIELDS = ('loss', 'efficiency', 'compare_fraction')
_BOOL_FIELDS = ('auth', 'bob_delay')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='qcrypto',
        description='Simulate quantum key distribution and quantum coin tossing.')
    parser.add_argument('--protocol', choices=['bb84', 'cointoss'])
    parser.add_argument('--n', type=int, help='pulses or photons per trial')
    parser.add_argument('--trials', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--loss', type=float, help='transit loss probability')
    parser.add_argument('--efficiency', type=float, help='detector efficiency')
    parser.add_argument('--eve', help='none, intercept-rectilinear, intercept-diagonal, '
                                      'intercept-random or intercept-angle:<rad>, optional @<fraction>')
    parser.add_argument('--compare-fraction', type=float)
    parser.add_argument('--cheat', help='honest, late, mixed, mixed:<deg> or epr:<storage loss>')
    parser.add_argument('--auth', action='store_true', default=None,
                        help='authenticate the public discussion')
    parser.add_argument('--output', choices=['json', 'csv', 'text'])
    parser.add_argument('--transcript', help='write a JSON-lines transcript here')
    parser.add_argument('--replay-paper', action='store_true',
                        help='replay the bundled worked example tables and exit')
    parser.add_argument('--config', help='INI file with an [experiment] section')
    parser.add_argument('--out', help='report file, stdout by default')
    parser.add_argument('--workers', type=int)
    parser.add_argument('--tamper', choices=['none', 'substitute', 'suppress'])
    parser.add_argument('--auth-pool', type=int, help='initial authentication key bits')
    parser.add_argument('--tag-width', type=int, choices=sorted(PRIMES))
    parser.add_argument('--bob-delay', action='store_true', default=None,
                        help='coin toss: Bob measures after announcing his guess')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--quiet', action='store_true')
    verbosity.add_argument('--verbose', action='store_true')
    return parser


def _read_config_file(file):
    parser = configparser.ConfigParser()
    with open(file, 'r', encoding='utf-8') as handle:
        parser.read_file(handle)
    if not parser.has_section('experiment'):
        raise InvalidArgument('%s has no [experiment] section' % file, field='config')
    section = parser['experiment']
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for key in section:
        name = key.replace('-', '_')
        if name not in names:
            raise InvalidArgument('Unknown config key %r' % key, field=name)
        try:
            if name in _INT_FIELDS:
                values[name] = section.getint(key)
            elif name in _FLOAT_FIELDS:
                values[name] = section.getfloat(key)
            elif name in _BOOL_FIELDS:
                values[name] = section.getboolean(key)
            else:
                values[name] = section.get(key)
        except ValueError:
            raise InvalidArgument('Bad value for %r: %r' % (key, section.get(key)), field=name)
    return values


def config_from_args(args):
    """ExperimentConfig from defaults, then the config file, then flags."""
    values = _read_config_file(args.config) if args.config else {}
    for f in dataclasses.fields(ExperimentConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return ExperimentConfig(**values)


def main(argv=None):
    """
    Command line entry point.

    Exit codes: 0 success, 1 invariant violation or failed replay, 2 usage
    error, 3 I/O or fixture error.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    level = logging.ERROR if args.quiet else logging.DEBUG if args.verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')

    if args.replay_paper:
        try:
            results = replay_paper_tables()
        except FixtureError as exc:
            print('fixture error: %s' % exc, file=sys.stderr)
            return EXIT_IO
        print(json.dumps({name: r.to_dict() for name, r in results.items()},
                         sort_keys=True, indent=1))
        return EXIT_OK if all(r.passed for r in results.values()) else EXIT_INVARIANT

    try:
        config = config_from_args(args)
    except InvalidArgument as exc:
        print('usage error: %s: %s' % (exc.field, exc), file=sys.stderr)
        return EXIT_USAGE
    except (OSError, configparser.Error) as exc:
        print('cannot read config: %s' % exc, file=sys.stderr)
        return EXIT_IO

    try:
        report = run(config, quiet=args.quiet or not sys.stderr.isatty())
        text = report.render()
        if args.out:
            with open(args.out, 'w', encoding='utf-8', newline='\n') as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print('I/O error: %s' % exc, file=sys.stderr)
        return EXIT_IO
    return EXIT_INVARIANT if report.invariant_violations else EXIT_OK
