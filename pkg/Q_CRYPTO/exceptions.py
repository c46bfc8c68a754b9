# -*- coding: utf-8 -*-
"""
Exceptions raised by Q_CRYPTO.

All of them derive from QCryptoError so callers can catch the whole family;
the ones that mirror a builtin category also derive from it.
"""


class QCryptoError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgument(QCryptoError, ValueError):
    """
    An argument or configuration value is out of its domain.

    Parameters
    ----------
    message : str
        Human readable explanation.
    field : str, optional
        Name of the offending argument / config field, reported by the CLI.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ContractViolation(QCryptoError, AssertionError):
    """An invariant that must hold by construction did not hold."""


class KeyExhaustedError(QCryptoError):
    """Not enough unconsumed key bits are left."""


class DoubleSpendError(QCryptoError):
    """Key bits were offered twice (pad and authentication pool, or reuse)."""


class DesyncError(QCryptoError):
    """The two authentication pools are not at the same consumption offset."""


class CommunicationsSuppressed(QCryptoError):
    """A public message never arrived intact: suppressed or failed its tag."""


class ScriptError(QCryptoError):
    """A scripted random source was asked for a value it cannot supply."""


class ScriptExhaustedError(ScriptError, LookupError):
    """A scripted stream ran out of values and has no fallback."""


class FixtureError(QCryptoError, FileNotFoundError):
    """A replay table is missing or does not have the expected rows."""
