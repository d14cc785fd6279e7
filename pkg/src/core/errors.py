"""
Exception hierarchy shared by the word, tree, flag and certification layers.

Library code raises these; only the command-line runner turns them into
exit codes.
"""
from typing import Optional


class AnosovToolkitError(Exception):
    """Base class for every domain error raised by the toolkit."""
    pass


class MembershipUndecidable(AnosovToolkitError):
    """A subgroup membership oracle exhausted its search budget without a verdict."""
    pass


class FactorMismatch(AnosovToolkitError):
    """A syllable does not belong to the factor it claims."""
    pass


class LetterRejected(AnosovToolkitError):
    """A letter supplied to an alternating sequence violates the avoidance or sign rules."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class PresentationInvalid(AnosovToolkitError):
    """Edge-group embeddings or the stable-letter relation do not evaluate consistently."""
    pass


class OutOfBall(AnosovToolkitError):
    """An element is not stored in the Cayley ball being queried."""
    pass


class TypeMismatch(AnosovToolkitError):
    """Flags of incompatible types were combined."""
    pass


class Singular(AnosovToolkitError):
    """A matrix expected to be invertible is numerically singular."""
    pass


class NoGap(AnosovToolkitError):
    """A required eigenvalue or singular-value gap vanishes."""
    pass


class EmptyNet(AnosovToolkitError):
    """A flag set has no net points."""
    pass


class UnboundGenerator(AnosovToolkitError):
    """A word references a generator name missing from the representation."""
    pass


class NotInCentralizer(AnosovToolkitError):
    """A bending element does not commute with the edge element."""
    pass


class OrderUnavailable(AnosovToolkitError):
    """Limit-set points cannot be placed on the boundary circle."""
    pass


class SceneInvalid(AnosovToolkitError):
    """A certification scene is internally inconsistent."""
    pass


class NotNested(AnosovToolkitError):
    """A shrinking sequence of image sets fails to be nested."""

    def __init__(self, message: str, index: int, margin: float):
        super().__init__(message)
        self.index = index
        self.margin = margin


class ConfigInvalid(AnosovToolkitError):
    """A scene configuration file failed validation."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field
