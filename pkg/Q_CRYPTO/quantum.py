# -*- coding: utf-8 -*-
"""
quantum.py contains the polarized photon formalism used by the protocols:
single photon state vectors in the 2-d complex Hilbert space, measurement
frames (rectilinear, diagonal, circular and arbitrary angle), projective
measurements with probabilistic collapse, and two-photon states in the 4-d
tensor product space including the EPR singlet.

Amplitudes live only inside this module. Protocol code handles photons as
opaque objects and can interact with them only by measuring them, so no code
path can read or copy an unknown polarization.

Randomness is always passed in by the caller (see ``channels.seeded_rng``);
nothing here owns random state.
"""

import enum
import logging
from functools import cached_property

import numpy as np

from Q_CRYPTO.exceptions import ContractViolation, InvalidArgument

LOGGER = logging.getLogger(__name__)

# 0.707 / 0.7071 in the printed formulas
SQRT_HALF = 1.0 / np.sqrt(2.0)

NORM_TOL = 1e-9
RENORM_TOL = 1e-6


def _as_amplitudes(values, dim):
    amps = np.asarray(values, dtype=complex).reshape(-1)
    if amps.shape != (dim,):
        raise InvalidArgument('Expected %d amplitudes, got %d' % (dim, amps.size))
    if not np.all(np.isfinite(amps)):
        raise InvalidArgument('Amplitudes must be finite')
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > RENORM_TOL:
        LOGGER.error('Rejecting state of norm %.12f', norm)
        raise ContractViolation('State vector norm %.12f is not 1' % norm)
    if abs(norm - 1.0) > NORM_TOL:
        amps = amps / norm
    amps.setflags(write=False)
    return amps


class StateVector:
    """
    Polarization state of one photon, a unit vector (a0, a1) over the
    rectilinear basis r1 = (1, 0), r2 = (0, 1).

    Parameters
    ----------
    a0, a1 : complex
        Amplitudes. Inputs within 1e-6 of unit norm are renormalized,
        anything farther is rejected.
    """

    __slots__ = ('_amps',)

    def __init__(self, a0, a1):
        self._amps = _as_amplitudes((a0, a1), 2)

    @classmethod
    def _trusted(cls, amps):
        obj = object.__new__(cls)
        amps = np.asarray(amps, dtype=complex)
        amps.setflags(write=False)
        obj._amps = amps
        return obj

    def __repr__(self):
        return '<StateVector>'


class PairState:
    """
    State of two photons, a unit vector over r1r1, r1r2, r2r1, r2r2.

    Parameters
    ----------
    amplitudes : sequence of 4 complex
    """

    __slots__ = ('_amps',)

    def __init__(self, amplitudes):
        self._amps = _as_amplitudes(amplitudes, 4)

    @classmethod
    def _trusted(cls, amps):
        obj = object.__new__(cls)
        amps = np.asarray(amps, dtype=complex)
        amps.setflags(write=False)
        obj._amps = amps
        return obj

    @classmethod
    def product(cls, first, second):
        """Tensor product of two one-photon states."""
        return cls._trusted(np.kron(first._amps, second._amps))

    @classmethod
    def antisymmetric(cls, basis):
        """0.7071 (b1 b2 - b2 b1) for the two vectors b1, b2 of `basis`."""
        b1, b2 = (v._amps for v in basis.vectors)
        return cls(SQRT_HALF * (np.kron(b1, b2) - np.kron(b2, b1)))

    def __repr__(self):
        return '<PairState>'


def photon_from_angle(alpha):
    """
    Photon polarized at angle `alpha` (radians) to the horizontal.

    Returns
    -------
    StateVector
        (cos alpha, sin alpha)
    """
    if not np.isfinite(alpha):
        raise InvalidArgument('Polarization angle must be finite', field='alpha')
    return StateVector._trusted(np.array([np.cos(alpha), np.sin(alpha)], dtype=complex))


class BasisKind(enum.Enum):
    RECTILINEAR = 'R'
    DIAGONAL = 'D'
    CIRCULAR = 'C'
    ANGLE = 'A'


class Basis:
    """
    A named orthonormal measurement frame of the one-photon space.

    Use the module constants RECTILINEAR, DIAGONAL and CIRCULAR, or
    ``Basis.angle(theta)`` for the real frame whose first vector is the photon
    polarized at `theta`.
    """

    def __init__(self, kind, vectors, theta=None):
        self.kind = kind
        self.theta = theta
        self.vectors = tuple(vectors)
        gram = np.array([[inner_product(u, v) for v in self.vectors] for u in self.vectors])
        if not np.allclose(gram, np.eye(2), atol=NORM_TOL, rtol=0):
            raise ContractViolation('Basis vectors are not orthonormal')

    @classmethod
    def angle(cls, theta):
        if not np.isfinite(theta):
            raise InvalidArgument('Basis angle must be finite', field='theta')
        return cls(BasisKind.ANGLE,
                   (photon_from_angle(theta), photon_from_angle(theta + np.pi / 2)),
                   theta=float(theta))

    @property
    def name(self):
        if self.kind is BasisKind.ANGLE:
            return 'A(%.6f)' % self.theta
        return self.kind.value

    @cached_property
    def matrix(self):
        """Columns are the basis vectors."""
        return np.column_stack([v._amps for v in self.vectors])

    @cached_property
    def measurement(self):
        return Measurement.from_basis(self)

    def equivalent(self, other):
        """True when both frames define the same pair of projectors."""
        return all(np.allclose(p, q, atol=NORM_TOL, rtol=0)
                   for p, q in zip(self.measurement.projectors,
                                   other.measurement.projectors))

    def conjugate(self):
        """Rectilinear <-> diagonal, the other frame used by the protocols."""
        if self.kind is BasisKind.RECTILINEAR:
            return DIAGONAL
        if self.kind is BasisKind.DIAGONAL:
            return RECTILINEAR
        raise InvalidArgument('Only rectilinear and diagonal have a protocol conjugate')

    def __repr__(self):
        return 'Basis(%s)' % self.name


class Measurement:
    """
    Projective measurement given by orthogonal projectors M_k that sum to the
    identity.

    Parameters
    ----------
    projectors : sequence of (d, d) arrays
    basis : Basis, optional
        Set when the measurement is the rank-one resolution of a basis; it
        enables the fast path and lets entangled halves be measured.
    """

    def __init__(self, projectors, basis=None):
        mats = [np.array(p, dtype=complex) for p in projectors]
        if not mats:
            raise ContractViolation('A measurement needs at least one projector')
        dim = mats[0].shape[0]
        eye = np.eye(dim)
        for j, p in enumerate(mats):
            if p.shape != (dim, dim):
                raise ContractViolation('Projectors must all be %dx%d' % (dim, dim))
            if not np.allclose(p, p.conj().T, atol=NORM_TOL, rtol=0):
                raise ContractViolation('Projector %d is not Hermitian' % j)
            if not np.allclose(p @ p, p, atol=NORM_TOL, rtol=0):
                raise ContractViolation('Projector %d is not idempotent' % j)
            for k in range(j + 1, len(mats)):
                if not np.allclose(p @ mats[k], 0, atol=NORM_TOL, rtol=0):
                    raise ContractViolation('Projectors %d and %d overlap' % (j, k))
        if not np.allclose(sum(mats), eye, atol=NORM_TOL, rtol=0):
            raise ContractViolation('Projectors do not resolve the identity')
        for p in mats:
            p.setflags(write=False)
        self.projectors = tuple(mats)
        self.dim = dim
        self.basis = basis

    @classmethod
    def from_basis(cls, basis):
        return cls([np.outer(v._amps, v._amps.conj()) for v in basis.vectors], basis=basis)

    def __len__(self):
        return len(self.projectors)


def _measurement_of(frame):
    if isinstance(frame, Basis):
        return frame.measurement
    return frame


def inner_product(phi, psi):
    """<phi|psi> = sum_j conj(phi_j) psi_j."""
    return complex(np.vdot(phi._amps, psi._amps))


def transmission_probability(alpha, beta):
    """
    Probability that a photon polarized at `alpha` passes a filter at `beta`.

    Returns
    -------
    float
        cos^2(alpha - beta)
    """
    if not (np.isfinite(alpha) and np.isfinite(beta)):
        raise InvalidArgument('Angles must be finite')
    return float(np.cos(alpha - beta) ** 2)


def outcome_probabilities(psi, frame):
    """|M_k psi|^2 for every outcome k of a Basis or Measurement."""
    m = _measurement_of(frame)
    if m.basis is not None:
        probs = np.abs(m.basis.matrix.conj().T @ psi._amps) ** 2
    else:
        probs = np.array([np.linalg.norm(p @ psi._amps) ** 2 for p in m.projectors])
    return np.clip(probs, 0.0, 1.0)


def _draw(probs, rng, purpose):
    k = int(np.argmax(probs))
    if probs[k] >= 1.0 - NORM_TOL:
        return k
    return rng.outcome(probs, purpose=purpose)


def measure(psi, frame, rng, purpose='outcome'):
    """
    Measure a one-photon state.

    Parameters
    ----------
    psi : StateVector
    frame : Basis or Measurement
    rng : random source (see ``channels``)
    purpose : str
        Stream name passed to the random source (scripted replays).

    Returns
    -------
    k : int
        Outcome index, drawn with probability |M_k psi|^2. Deterministic
        outcomes do not consume randomness.
    post : StateVector
        M_k psi / |M_k psi|.
    """
    m = _measurement_of(frame)
    probs = outcome_probabilities(psi, m)
    k = _draw(probs, rng, purpose)
    if m.basis is not None:
        b = m.basis.vectors[k]._amps
        amp = np.vdot(b, psi._amps)
        post = b * (amp / abs(amp))
    else:
        proj = m.projectors[k] @ psi._amps
        post = proj / np.linalg.norm(proj)
    return k, StateVector._trusted(post)


def epr_pair():
    """The singlet 0.7071 (r1 r2 - r2 r1)."""
    return PairState._trusted(np.array([0.0, SQRT_HALF, -SQRT_HALF, 0.0], dtype=complex))


def pair_coordinates(pair, basis):
    """
    Coordinates of `pair` over b1b1, b1b2, b2b1, b2b2 for the vectors of
    `basis` (change of basis of the tensor product).
    """
    adj = basis.matrix.conj().T
    return np.kron(adj, adj) @ pair._amps


def measure_pair(pair, which, basis, rng, purpose='outcome'):
    """
    Measure one photon of a pair in `basis`.

    Parameters
    ----------
    pair : PairState
    which : {'first', 'second'} or {0, 1}
    basis : Basis

    Returns
    -------
    k : int
        Outcome drawn from the marginal distribution of the measured photon.
    remaining : StateVector
        Conditional state of the other photon.
    """
    idx = {'first': 0, 'second': 1}.get(which, which)
    if idx not in (0, 1):
        raise InvalidArgument("which must be 'first' or 'second'", field='which')
    amps = pair._amps.reshape(2, 2)
    adj = basis.matrix.conj().T
    # rows: outcome k, columns: other photon's rectilinear coordinates
    branch = adj @ amps if idx == 0 else (amps @ adj.T).T
    probs = np.clip(np.sum(np.abs(branch) ** 2, axis=1), 0.0, 1.0)
    k = _draw(probs, rng, purpose)
    rest = branch[k]
    return k, StateVector._trusted(rest / np.linalg.norm(rest))


class PairRegister:
    """
    Holder of one photon pair whose two halves travel separately.

    The register starts entangled; the first measurement of either half
    collapses it and fixes the state of the other half.
    """

    def __init__(self, pair):
        self._pair = pair
        self._local = [None, None]

    @property
    def entangled(self):
        return self._local[0] is None and self._local[1] is None

    def split(self):
        return EntangledPhoton(self, 0), EntangledPhoton(self, 1)

    def _measure_half(self, which, frame, rng, purpose):
        m = _measurement_of(frame)
        if self.entangled:
            if m.basis is None:
                raise InvalidArgument('Entangled halves are measured in a Basis')
            k, remaining = measure_pair(self._pair, which, m.basis, rng, purpose)
            self._local[1 - which] = remaining
            post = m.basis.vectors[k]
        else:
            k, post = measure(self._local[which], m, rng, purpose)
        self._local[which] = post
        return k, post


class EntangledPhoton:
    """Opaque handle to one half of a PairRegister."""

    __slots__ = ('register', 'which')

    def __init__(self, register, which):
        self.register = register
        self.which = which

    def __repr__(self):
        return '<EntangledPhoton %d>' % self.which


def measure_photon(photon, frame, rng, purpose='outcome'):
    """Measure a photon handle, free or one half of a pair."""
    if isinstance(photon, EntangledPhoton):
        return photon.register._measure_half(photon.which, frame, rng, purpose)
    return measure(photon, frame, rng, purpose)


def hidden_variable_pair(rng):
    """
    Classical imitation of a pair: two oppositely polarized photons at a
    random common angle. Unlike the singlet, measuring both in one
    intermediate basis sometimes gives the same polarization.
    """
    alpha = np.pi * rng.random(purpose='hidden_angle')
    return photon_from_angle(alpha), photon_from_angle(alpha + np.pi / 2)


def states_equal(phi, psi, tol=NORM_TOL, up_to_phase=False):
    """Compare two states of the same dimension."""
    a, b = phi._amps, psi._amps
    if a.shape != b.shape:
        return False
    if up_to_phase:
        return bool(abs(abs(np.vdot(a, b)) - 1.0) <= tol)
    return bool(np.allclose(a, b, atol=tol, rtol=0))


def is_unit(state, tol=NORM_TOL):
    return bool(abs(np.linalg.norm(state._amps) - 1.0) <= tol)


RECTILINEAR = Basis(BasisKind.RECTILINEAR,
                    (StateVector(1, 0), StateVector(0, 1)), theta=0.0)
# 45 and 135 degree photons, so that DIAGONAL is exactly Basis.angle(pi/4)
DIAGONAL = Basis(BasisKind.DIAGONAL,
                 (StateVector(SQRT_HALF, SQRT_HALF), StateVector(-SQRT_HALF, SQRT_HALF)),
                 theta=np.pi / 4)
CIRCULAR = Basis(BasisKind.CIRCULAR,
                 (StateVector(SQRT_HALF, 1j * SQRT_HALF), StateVector(1j * SQRT_HALF, SQRT_HALF)))

R1, R2 = RECTILINEAR.vectors
D1, D2 = DIAGONAL.vectors
C1, C2 = CIRCULAR.vectors
