"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front-end:
2 for usage errors, 3 for format/join/domain errors, 4 for numerical failures.
"""


class BandtagError(Exception):
    exit_code = 1


class UsageError(BandtagError, ValueError):
    exit_code = 2


class InvalidConfig(UsageError):
    pass


class InvalidJ(UsageError):
    pass


class InvalidSpec(UsageError):
    pass


class DataError(BandtagError, ValueError):
    exit_code = 3


class FormatError(DataError):
    pass


class JoinError(DataError):
    pass


class LabelDomainError(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class PartitionError(DataError):
    pass


class OverlapError(PartitionError):
    pass


class GapError(PartitionError):
    pass


class UnknownFeatureError(PartitionError):
    pass


class ParseError(DataError):
    pass


class DuplicateFeatureError(ParseError):
    pass


class EmptyGroupError(ParseError, PartitionError):
    pass


class MissingSourceTag(DataError):
    pass


class MismatchedGroups(DataError):
    pass


class EmptyInput(DataError):
    pass


class DegenerateError(DataError):
    pass


class DegenerateTargetError(DegenerateError):
    pass


class NumericalError(BandtagError, ArithmeticError):
    exit_code = 4
