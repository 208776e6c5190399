"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to categorized process exit statuses.
"""


class HiddenMultError(Exception):
    """Base class for all library errors."""

    exit_code = 5


class FormatError(HiddenMultError):
    """A serialized record is malformed or bound to another platform."""

    exit_code = 3


class SearchExhausted(HiddenMultError):
    """A randomized search ran out of its attempt budget."""

    exit_code = 4


class NotInvertible(HiddenMultError, ValueError):
    pass


class ModuliNotCoprime(HiddenMultError, ValueError):
    pass


class ModulusTooLarge(HiddenMultError, ValueError):
    pass


class BadGroupOrder(HiddenMultError, ValueError):
    pass


class FactorizationFailed(HiddenMultError, ValueError):
    pass


class PoolExhausted(HiddenMultError):
    pass


class UnsupportedForV1(HiddenMultError):
    pass


class WrongVariant(HiddenMultError):
    pass


class UnknownParty(HiddenMultError, KeyError):
    pass


class MessageOutOfRange(HiddenMultError, ValueError):
    pass


class NotInSubgroup(HiddenMultError, ValueError):
    pass


class DecodeUnsupported(HiddenMultError):
    pass


class PoolTooLarge(HiddenMultError, ValueError):
    pass


class ThresholdOutOfRange(HiddenMultError, ValueError):
    pass


class Inconclusive(HiddenMultError):
    pass


class OracleRequired(HiddenMultError, TypeError):
    pass
