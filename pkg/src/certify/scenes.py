"""
Certification scenes and reports.

A scene bundles a splitting presentation, the representation it came from and
the flag sets playing ping-pong; a report collects one margin per checked
condition and turns them into a verdict.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np

from src.config.settings import settings
from src.core.errors import SceneInvalid
from src.core.types import Verdict
from src.geometry.flags import FlagSet, opposition_involution
from src.geometry.reps import MatrixRep, Split
from src.groups.presentations import AmalgamPresentation, HnnPresentation


def _check_sets(sets: Dict[str, FlagSet]) -> None:
    ftypes = {s.ftype for s in sets.values()}
    if len(ftypes) != 1:
        raise SceneInvalid(f"scene sets have different flag types: {sorted(t.dims for t in ftypes)}")
    ftype = next(iter(ftypes))
    if ftype != opposition_involution(ftype):
        raise SceneInvalid(f"flag type {ftype.dims} is not invariant under the opposition involution")
    for name, s in sets.items():
        if len(s) == 0:
            raise SceneInvalid(f"set {name} has an empty net")


class _Thresholded:
    """Margin threshold at the scene depth, shrunk by exp(-margin_decay) per level past the first."""

    @property
    def threshold(self) -> float:
        return self.margin * math.exp(-self.margin_decay * max(self.depth - 1, 0))


@dataclass
class PairScene(_Thresholded):
    """Amalgam data (Gamma_A, Gamma_B; H) with candidate sets (A, B)."""
    presentation: AmalgamPresentation
    rep: MatrixRep
    set_a: FlagSet
    set_b: FlagSet
    depth: int = settings.CHECK_DEPTH
    margin: float = settings.MEMBERSHIP_MARGIN
    seed: int = 0
    split: Optional[Split] = None
    relaxed: bool = False
    limit_depth: int = settings.LIMIT_SET_DEPTH
    label: str = ""
    margin_decay: float = 0.0
    falsify_tol: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.presentation, AmalgamPresentation):
            raise SceneInvalid("a pair scene needs an amalgam presentation")
        _check_sets({"A": self.set_a, "B": self.set_b})
        if self.set_a.ftype.d != self.presentation.d:
            raise SceneInvalid(f"flags live in R^{self.set_a.ftype.d} but matrices are {self.presentation.d}x{self.presentation.d}")

    @property
    def kind(self) -> str:
        return "pair"

    @property
    def sets(self) -> Dict[str, FlagSet]:
        return {"A": self.set_a, "B": self.set_b}


@dataclass
class TripleScene(_Thresholded):
    """HNN data (M; H_+-; f) with candidate sets (A, B_+, B_-)."""
    presentation: HnnPresentation
    rep: MatrixRep
    set_a: FlagSet
    set_plus: FlagSet
    set_minus: FlagSet
    depth: int = settings.CHECK_DEPTH
    margin: float = settings.MEMBERSHIP_MARGIN
    seed: int = 0
    split: Optional[Split] = None
    relaxed: bool = False
    limit_depth: int = settings.LIMIT_SET_DEPTH
    label: str = ""
    margin_decay: float = 0.0
    falsify_tol: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.presentation, HnnPresentation):
            raise SceneInvalid("a triple scene needs an HNN presentation")
        _check_sets({"A": self.set_a, "B+": self.set_plus, "B-": self.set_minus})
        if self.set_a.ftype.d != self.presentation.d:
            raise SceneInvalid("flag dimension differs from the matrix size")

    @property
    def kind(self) -> str:
        return "triple"

    @property
    def sets(self) -> Dict[str, FlagSet]:
        return {"A": self.set_a, "B+": self.set_plus, "B-": self.set_minus}

    def set_for(self, sign: int) -> FlagSet:
        return self.set_plus if sign > 0 else self.set_minus


Scene = Union[PairScene, TripleScene]


@dataclass
class ConditionResult:
    """Smallest margin of one condition over everything checked for it."""
    name: str
    margin: float
    checked: int
    witness: Optional[dict] = None
    skipped: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "margin": self.margin, "checked": self.checked, "skipped": self.skipped}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CertReport:
    kind: str
    verdict: Verdict
    depth: int
    threshold: float
    conditions: List[ConditionResult] = field(default_factory=list)
    witness: Optional[dict] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)
    assumptions: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def margins(self) -> Dict[str, float]:
        return {c.name: c.margin for c in self.conditions if not c.skipped}

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "verdict": self.verdict.value,
            "depth": self.depth,
            "threshold": self.threshold,
            "conditions": [c.to_dict() for c in self.conditions],
            "assumptions": list(self.assumptions),
            "notes": list(self.notes),
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def decide(conditions: List[ConditionResult], threshold: float,
           tol: Optional[float] = None) -> (Verdict, Optional[dict]):
    """
    falsified if some margin is below -tol (first such condition gives the
    witness), certified-at-depth if every checked margin exceeds the threshold,
    inconclusive otherwise.
    """
    tol = settings.FALSIFY_TOL if tol is None else tol
    active = [c for c in conditions if not c.skipped]
    for c in active:
        if c.margin < -tol:
            witness = dict(c.witness or {})
            witness.setdefault("condition", c.name)
            witness.setdefault("margin", c.margin)
            return Verdict.FALSIFIED, witness
    if all(c.margin > threshold for c in active):
        return Verdict.CERTIFIED_AT_DEPTH, None
    return Verdict.INCONCLUSIVE, None


def flag_witness(basis: np.ndarray) -> list:
    return np.asarray(basis, dtype=float).tolist()
