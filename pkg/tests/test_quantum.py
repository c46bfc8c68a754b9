# -*- coding: utf-8 -*-
"""
Using pytest to create unit tests for the photon and photon-pair formalism.

to run unit tests, run pytest from the command line in the Q_CRYPTO directory
to run coverage tests, run py.test --cov-report term-missing --cov=Q_CRYPTO
"""

import itertools

import numpy as np
import pytest

from Q_CRYPTO import quantum
from Q_CRYPTO.channels import scripted_rng, seeded_rng
from Q_CRYPTO.exceptions import ContractViolation, InvalidArgument, ScriptError
from Q_CRYPTO.quantum import (CIRCULAR, DIAGONAL, RECTILINEAR, Basis, Measurement,
                              PairRegister, PairState, StateVector, epr_pair,
                              inner_product, measure, measure_pair, measure_photon,
                              outcome_probabilities, pair_coordinates, photon_from_angle)

BASES = (RECTILINEAR, DIAGONAL, CIRCULAR)


def test_conjugate_bases():
    count = 0
    for first, second in itertools.combinations(BASES, 2):
        for u in first.vectors:
            for v in second.vectors:
                assert abs(abs(inner_product(u, v)) ** 2 - 0.5) < 1e-9
                count += 1
    assert count == 12


@pytest.mark.parametrize('alpha', [0.0, np.pi / 8, np.pi / 4, 3 * np.pi / 8])
def test_cos2_law(alpha):
    rng = seeded_rng(11)
    photon = photon_from_angle(alpha)
    n = 100_000
    passed = sum(1 - measure(photon, RECTILINEAR, rng)[0] for _ in range(n))
    p = np.cos(alpha) ** 2
    radius = 4 * np.sqrt(p * (1 - p) / n)
    assert abs(passed / n - p) <= radius + 1e-12
    assert quantum.transmission_probability(alpha, 0.0) == pytest.approx(p)


def test_measurement_collapses_state():
    rng = seeded_rng(3)
    for _ in range(100):
        k, post = measure(photon_from_angle(0.3), DIAGONAL, rng)
        again, _ = measure(post, DIAGONAL, rng)
        assert again == k
        assert quantum.states_equal(post, DIAGONAL.vectors[k], up_to_phase=True)


def test_deterministic_outcome_consumes_no_randomness():
    rng = scripted_rng({})
    k, _ = measure(RECTILINEAR.vectors[1], RECTILINEAR, rng)
    assert k == 1
    assert rng.record == []


def test_scripted_impossible_outcome():
    rng = scripted_rng({"outcome": [2]})
    with pytest.raises(ScriptError):
        measure(photon_from_angle(np.pi / 8), RECTILINEAR, rng)


def test_state_normalization():
    # within tolerance gets renormalized
    s = StateVector(1.0 + 1e-7, 0.0)
    assert quantum.is_unit(s)
    with pytest.raises(ContractViolation):
        StateVector(1.0, 1.0)
    with pytest.raises(InvalidArgument):
        photon_from_angle(np.inf)
    with pytest.raises(InvalidArgument):
        StateVector(np.nan, 0)


def test_angle_basis_matches_diagonal():
    assert Basis.angle(np.pi / 4).equivalent(DIAGONAL)
    assert Basis.angle(0.0).equivalent(RECTILINEAR)
    assert not DIAGONAL.equivalent(RECTILINEAR)
    assert RECTILINEAR.conjugate() is DIAGONAL
    with pytest.raises(InvalidArgument):
        CIRCULAR.conjugate()


def test_invalid_measurement():
    with pytest.raises(ContractViolation):
        Measurement([np.eye(2), np.eye(2)])
    with pytest.raises(ContractViolation):
        Measurement([[[1, 1], [0, 0]], [[0, -1], [0, 1]]])
    with pytest.raises(ContractViolation):
        Measurement([[[1, 0], [0, 0]]])
    m = Measurement([[[1, 0], [0, 0]], [[0, 0], [0, 1]]])
    probs = outcome_probabilities(photon_from_angle(np.pi / 3), m)
    assert probs == pytest.approx([0.25, 0.75])


def _random_angle_bases(count=10, seed=17):
    rng = seeded_rng(seed)
    return [Basis.angle(np.pi * rng.random()) for _ in range(count)]


def test_epr_coordinates():
    singlet = epr_pair()
    expected = [0.0, np.sqrt(0.5), -np.sqrt(0.5), 0.0]
    for basis in BASES:
        assert np.allclose(pair_coordinates(singlet, basis), expected, atol=1e-9)
        assert quantum.states_equal(PairState.antisymmetric(basis), singlet)


def test_epr_coordinates_in_rotated_bases():
    singlet = epr_pair()
    expected = [0.0, np.sqrt(0.5), -np.sqrt(0.5), 0.0]
    for basis in _random_angle_bases() + [Basis.angle(np.pi / 8), Basis.angle(2.0)]:
        assert np.allclose(pair_coordinates(singlet, basis), expected, atol=1e-9)
        assert quantum.states_equal(PairState.antisymmetric(basis), singlet)


def test_epr_anticorrelation():
    rng = seeded_rng(5)
    singlet = epr_pair()
    bases = list(BASES) + _random_angle_bases()
    choices = rng.generator.integers(0, len(bases), size=100_000)
    for c in choices:
        basis = bases[c]
        k, rest = measure_pair(singlet, 'first', basis, rng)
        other, _ = measure(rest, basis, rng)
        assert other == 1 - k
    assert set(choices.tolist()) == set(range(len(bases)))


def test_epr_cross_basis_randomness():
    # frames pi/4 apart share no correlation: results agree half the time
    rng = seeded_rng(6)
    singlet = epr_pair()
    n = 100_000
    frames = [(basis, Basis.angle(basis.theta + np.pi / 4))
              for basis in [RECTILINEAR] + _random_angle_bases(count=20, seed=23)]
    choices = rng.generator.integers(0, len(frames), size=n)
    agree = 0
    for c in choices:
        first, second = frames[c]
        k, rest = measure_pair(singlet, 'first', first, rng)
        agree += measure(rest, second, rng)[0] == k
    assert abs(agree / n - 0.5) <= 4 * np.sqrt(0.25 / n)
    agree = 0
    for _ in range(n):
        k, rest = measure_pair(singlet, 'second', RECTILINEAR, rng)
        agree += measure(rest, DIAGONAL, rng)[0] == k
    assert abs(agree / n - 0.5) <= 4 * np.sqrt(0.25 / n)


def test_measure_pair_marginal_uniform():
    rng = seeded_rng(8)
    n = 10_000
    ones = sum(measure_pair(epr_pair(), 'second', CIRCULAR, rng)[0] for _ in range(n))
    assert abs(ones / n - 0.5) <= 4 * np.sqrt(0.25 / n)
    with pytest.raises(InvalidArgument):
        measure_pair(epr_pair(), 'third', CIRCULAR, rng)


def test_pair_register_either_order():
    rng = seeded_rng(13)
    for order in ((0, 1), (1, 0)):
        for _ in range(200):
            register = PairRegister(epr_pair())
            halves = register.split()
            assert register.entangled
            first, _ = measure_photon(halves[order[0]], DIAGONAL, rng)
            assert not register.entangled
            second, _ = measure_photon(halves[order[1]], DIAGONAL, rng)
            assert first + second == 1


def test_product_state_is_not_entangled():
    pair = PairState.product(RECTILINEAR.vectors[0], DIAGONAL.vectors[1])
    k, rest = measure_pair(pair, 0, RECTILINEAR, seeded_rng(1))
    assert k == 0
    assert quantum.states_equal(rest, DIAGONAL.vectors[1], up_to_phase=True)


def test_hidden_variable_pairs_sometimes_agree():
    # the singlet never gives equal results in a shared basis; oppositely
    # polarized photon pairs at a random angle do about a quarter of the time
    rng = seeded_rng(21)
    basis = Basis.angle(np.pi / 8)
    n = 4000
    same = 0
    for _ in range(n):
        a, b = quantum.hidden_variable_pair(rng)
        same += measure(a, basis, rng)[0] == measure(b, basis, rng)[0]
    assert abs(same / n - 0.25) <= 4 * np.sqrt(0.25 * 0.75 / n)
    for _ in range(n):
        k, rest = measure_pair(epr_pair(), 0, basis, rng)
        assert measure(rest, basis, rng)[0] != k
