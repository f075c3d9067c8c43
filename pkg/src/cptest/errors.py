"""Exception hierarchy.

Two families matter to callers: ``InputError`` (malformed input, wrong shapes,
bad parameters) and ``ContractViolation`` (well-formed input that breaks a
statistical precondition, e.g. a single-class training set). The CLI maps
them to exit codes 2 and 3.
"""


class CPTError(Exception):
    pass


class InputError(CPTError, ValueError):
    pass


class ContractViolation(CPTError):
    pass


class DimensionMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class EmptyInput(InputError):
    pass


class EmptyVocabulary(InputError):
    pass


class NotPositiveDefinite(InputError):
    pass


class SingularFactor(InputError):
    pass


class SingleClassTrainingSet(ContractViolation):
    pass


class KTooLarge(ContractViolation):
    pass


class FoldTooSmall(ContractViolation):
    pass


class DegenerateBandwidth(ContractViolation):
    pass


class PointOutsideSupportOfF(ContractViolation):
    pass
