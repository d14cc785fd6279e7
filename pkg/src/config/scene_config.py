"""
Scene files: one JSON document describing a group, its splitting, the flag
sets and the certifier parameters of a run.

A scene either names a built-in ``fixture`` (optionally overriding its sets and
parameters) or spells out generator matrices and a split.
"""
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.errors import ConfigInvalid
from src.groups import matrices as mx

Entry = Union[int, float, str]


class SetSpec(BaseModel):
    """A flag set given by arcs of RP^1 (Veronese nets), degree grids of lines, or explicit flag bases."""
    model_config = ConfigDict(extra="forbid")

    label: Optional[str] = None
    arcs: Optional[List[List[float]]] = None        # [start_deg, end_deg] pairs, counterclockwise
    degrees: Optional[List[List[float]]] = None     # [start, stop, step] lines of R^2
    flags: Optional[List[List[List[float]]]] = None  # d x d orthonormal bases
    size: Optional[int] = Field(default=None, gt=1)
    r: Optional[float] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def exactly_one_source(self):
        given = [x for x in (self.arcs, self.degrees, self.flags) if x is not None]
        if len(given) != 1:
            raise ValueError("a set needs exactly one of arcs, degrees or flags")
        if (self.degrees is not None or self.flags is not None) and self.r is None:
            raise ValueError("degree grids and explicit flags need an inflation radius r")
        for pair in self.arcs or []:
            if len(pair) != 2:
                raise ValueError("arcs are [start_deg, end_deg] pairs")
        for triple in self.degrees or []:
            if len(triple) != 3 or triple[2] <= 0:
                raise ValueError("degree grids are [start, stop, positive step] triples")
        return self


class SplitSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factor_a: List[str] = []
    factor_b: List[str] = []
    edge_a: List[str] = []
    edge_b: List[str] = []
    factor_m: List[str] = []
    stable: str = "f"
    minus: List[str] = []
    plus: List[str] = []


class CertifierSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    depth: Optional[int] = Field(default=None, ge=1)
    margin: Optional[float] = Field(default=None, gt=0)
    falsify_tol: Optional[float] = Field(default=None, gt=0)
    slope_floor: Optional[float] = Field(default=None, gt=0)
    relaxed: bool = False
    limit_depth: Optional[int] = Field(default=None, ge=1)
    injectivity_depth: Optional[int] = Field(default=None, ge=0)


class BendSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    direction: Optional[List[float]] = None
    s_hi: float = Field(default=1.0, gt=0)
    iterations: Optional[int] = Field(default=None, ge=1)
    ray_points: Optional[int] = Field(default=None, ge=1)


class SequenceSpecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["A", "B", "HNN"] = "A"
    length: Optional[int] = Field(default=None, ge=1)
    alphas: Optional[List[str]] = None
    betas: Optional[List[str]] = None
    mus: Optional[List[str]] = None
    epsilons: Optional[List[int]] = None
    letter_length: int = Field(default=1, ge=1)


class SceneConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: int = Field(default=1, alias="schema")
    seed: int
    fixture: Optional[str] = None
    mode: Optional[Literal["amalgam", "hnn"]] = None
    d: Optional[int] = Field(default=None, ge=2)
    generators: Optional[Dict[str, List[List[Entry]]]] = None
    split: Optional[SplitSpec] = None
    flag_type: Optional[List[int]] = None
    sets: Dict[str, SetSpec] = {}
    certifier: CertifierSpec = CertifierSpec()
    bend: BendSpec = BendSpec()
    sequence: SequenceSpecModel = SequenceSpecModel()
    gap_length: Optional[int] = Field(default=None, ge=2)
    gap_samples: Optional[int] = Field(default=None, ge=1)
    words: List[str] = []
    output: Optional[str] = None

    @field_validator("schema_version")
    @classmethod
    def known_schema(cls, v: int) -> int:
        if v != 1:
            raise ValueError(f"unsupported scene schema {v}")
        return v

    @field_validator("generators")
    @classmethod
    def parse_matrices(cls, v):
        if v is None:
            return v
        for name, rows in v.items():
            try:
                mx.as_matrix(rows)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"generator {name}: {exc}")
        return v

    @model_validator(mode="after")
    def fixture_or_group(self):
        if self.fixture is None:
            if self.generators is None:
                raise ValueError("a scene needs a fixture or generator matrices")
            shapes = {len(rows) for rows in self.generators.values()}
            if self.d is not None and shapes != {self.d}:
                raise ValueError(f"generator matrices must be {self.d}x{self.d}")
            if self.d is None:
                self.d = shapes.pop() if len(shapes) == 1 else None
                if self.d is None:
                    raise ValueError("generator matrices have different sizes")
            if self.mode is not None and self.split is None:
                raise ValueError(f"mode {self.mode} needs a split")
        return self

    def matrices(self) -> Dict[str, np.ndarray]:
        return {name: mx.as_matrix(rows) for name, rows in (self.generators or {}).items()}


def _location(err: dict) -> str:
    return ".".join(str(x) for x in err.get("loc", ())) or "<root>"


def parse_scene_config(data: Union[dict, str]) -> SceneConfig:
    """
    Validate a scene document.

    Raises:
        ConfigInvalid: with the location of the first offending field.
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"line {exc.lineno}: {exc.msg}", f"line {exc.lineno}")
    try:
        return SceneConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = _location(first)
        raise ConfigInvalid(f"{where}: {first['msg']}", where)


def load_scene_config(path: Union[str, Path]) -> SceneConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read scene file {path}: {exc.strerror}", "config")
    return parse_scene_config(text)
