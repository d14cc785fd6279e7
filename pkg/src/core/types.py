from enum import Enum


class FactorTag(Enum):
    """Which piece of a splitting a syllable or vertex belongs to."""
    A = "A"
    B = "B"
    M = "M"
    STABLE = "StableLetter"

    @property
    def other(self) -> "FactorTag":
        if self is FactorTag.A:
            return FactorTag.B
        if self is FactorTag.B:
            return FactorTag.A
        raise ValueError(f"{self.value} has no opposite factor")


class SplitKind(Enum):
    AMALGAM = "amalgam"
    HNN = "hnn"


class Verdict(Enum):
    CERTIFIED = "certified"
    CERTIFIED_AT_DEPTH = "certified-at-depth"
    FALSIFIED = "falsified"
    INCONCLUSIVE = "inconclusive"
    PASS = "PASS"
    FAIL = "FAIL"

    @property
    def exit_code(self) -> int:
        if self in (Verdict.CERTIFIED, Verdict.CERTIFIED_AT_DEPTH, Verdict.PASS):
            return 0
        if self in (Verdict.FALSIFIED, Verdict.FAIL):
            return 2
        return 3
