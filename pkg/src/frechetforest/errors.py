"""Exception hierarchy shared by every module of the package."""


class FrechetError(Exception):
    """Base class for all errors raised by frechetforest."""


class InputError(FrechetError, ValueError):
    """Invalid user input (maps to CLI exit code 2)."""


class EmptyInput(InputError):
    pass


class TooFewItems(InputError):
    pass


class DegenerateSpace(FrechetError):
    """All pairwise distances are zero: no Voronoi split with distinct centers."""


class EmptyCurve(InputError):
    pass


class InvalidCurve(InputError):
    pass


class UnsplittableVariable(FrechetError):
    pass


class NodeTooSmall(FrechetError):
    pass


class NoValidSplit(FrechetError):
    pass


class NotApplicable(FrechetError):
    pass


class MissingVariable(InputError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidParams(InputError):
    pass


class NoOOBCoverage(FrechetError):
    pass


class InvalidGrid(InputError):
    pass


class DomainError(InputError):
    pass


class DuplicateSample(InputError):
    pass


class IncompleteObservation(InputError):
    pass


class InvalidFraction(InputError):
    pass


class InvariantViolation(FrechetError):
    """An internal consistency check failed (maps to CLI exit code 3)."""
