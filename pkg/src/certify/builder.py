"""
Turn a validated SceneConfig into representations, presentations and scenes.
"""
import dataclasses
import math

import numpy as np

from src.config.scene_config import SceneConfig, SetSpec
from src.core.errors import ConfigInvalid, SceneInvalid
from src.core.types import SplitKind
from src.certify.checks import union_set
from src.certify.fixtures import PRESENTATIONS, REPS, SCENES, degree_net
from src.certify.scenes import PairScene, TripleScene
from src.geometry.flags import FlagSet, FlagType
from src.geometry.reps import MatrixRep, Split, arc_net, lift_rep


def flag_type(cfg: SceneConfig, d: int) -> FlagType:
    return FlagType(tuple(cfg.flag_type), d) if cfg.flag_type else FlagType.full(d)


def build_rep(cfg: SceneConfig) -> MatrixRep:
    if cfg.generators is not None:
        return MatrixRep(cfg.matrices())
    if cfg.fixture in REPS:
        rep = REPS[cfg.fixture]()
        if cfg.fixture == "genus2" and cfg.d and cfg.d != 2:
            rep = lift_rep(rep, cfg.d)
        return rep
    if cfg.fixture in SCENES:
        return build_scene(cfg).rep
    raise ConfigInvalid(f"unknown fixture {cfg.fixture!r}", "fixture")


def build_split(cfg: SceneConfig) -> Split:
    s = cfg.split
    if cfg.mode == "amalgam":
        return Split(SplitKind.AMALGAM, factor_a=tuple(s.factor_a), factor_b=tuple(s.factor_b),
                     edge_a=tuple(s.edge_a), edge_b=tuple(s.edge_b))
    return Split(SplitKind.HNN, factor_m=tuple(s.factor_m), stable=s.stable,
                 minus=tuple(s.minus), plus=tuple(s.plus))


def build_presentation(cfg: SceneConfig):
    if cfg.generators is not None:
        if cfg.mode is None:
            raise ConfigInvalid("word commands need a mode and a split", "mode")
        return build_split(cfg).presentation(MatrixRep(cfg.matrices()))
    if cfg.fixture in PRESENTATIONS:
        return PRESENTATIONS[cfg.fixture]()
    if cfg.fixture in SCENES:
        return build_scene(cfg).presentation
    raise ConfigInvalid(f"fixture {cfg.fixture!r} has no presentation", "fixture")


def build_set(spec: SetSpec, ftype: FlagType, label: str) -> FlagSet:
    label = spec.label or label
    d = ftype.d
    if spec.arcs is not None:
        pieces = [arc_net(math.radians(a), math.radians(b), d, spec.size, label) for a, b in spec.arcs]
        out = pieces[0] if len(pieces) == 1 else union_set(pieces, label)
        if spec.r is not None:
            out.r = spec.r
        return out
    if spec.degrees is not None:
        if d != 2:
            raise ConfigInvalid(f"set {label}: degree grids describe lines of R^2", f"sets.{label}")
        return degree_net(spec.degrees, label, spec.r)
    net = np.array(spec.flags, dtype=float)
    if net.shape[1:] != (d, d):
        raise ConfigInvalid(f"set {label}: flag bases must be {d}x{d}", f"sets.{label}.flags")
    return FlagSet(net, ftype, spec.r, label)


def _overrides(cfg: SceneConfig) -> dict:
    c = cfg.certifier
    out = {"seed": cfg.seed, "relaxed": c.relaxed}
    if c.depth is not None:
        out["depth"] = c.depth
    if c.margin is not None:
        out["margin"] = c.margin
    if c.falsify_tol is not None:
        out["falsify_tol"] = c.falsify_tol
    if c.limit_depth is not None:
        out["limit_depth"] = c.limit_depth
    return out


_SET_FIELDS = {"A": "set_a", "B": "set_b", "B+": "set_plus", "B-": "set_minus"}


def build_scene(cfg: SceneConfig):
    """
    Fixture scenes take their sets from the fixture unless ``sets`` overrides
    them; custom scenes need every set spelled out.
    """
    if cfg.fixture is not None:
        if cfg.fixture not in SCENES:
            raise ConfigInvalid(f"fixture {cfg.fixture!r} is not a scene (have {sorted(SCENES)})", "fixture")
        kwargs = {"seed": cfg.seed}
        if cfg.d is not None and cfg.fixture.startswith("genus2"):
            kwargs["d"] = cfg.d
        scene = SCENES[cfg.fixture](**kwargs)
    else:
        scene = _custom_scene(cfg)
    changes = _overrides(cfg)
    ftype = scene.set_a.ftype
    for name, spec in cfg.sets.items():
        if name not in _SET_FIELDS or not hasattr(scene, _SET_FIELDS[name]):
            raise ConfigInvalid(f"scene has no set named {name!r}", f"sets.{name}")
        changes[_SET_FIELDS[name]] = build_set(spec, ftype, name)
    try:
        return dataclasses.replace(scene, **changes)
    except SceneInvalid as exc:
        raise ConfigInvalid(str(exc), "sets")


def _custom_scene(cfg: SceneConfig):
    if cfg.mode is None:
        raise ConfigInvalid("custom scenes need a mode", "mode")
    rep = MatrixRep(cfg.matrices())
    split = build_split(cfg)
    p = split.presentation(rep)
    ftype = flag_type(cfg, rep.d)
    needed = ("A", "B") if cfg.mode == "amalgam" else ("A", "B+", "B-")
    missing = [n for n in needed if n not in cfg.sets]
    if missing:
        raise ConfigInvalid(f"custom {cfg.mode} scene is missing sets {missing}", "sets")
    sets = {n: build_set(cfg.sets[n], ftype, n) for n in needed}
    try:
        if cfg.mode == "amalgam":
            return PairScene(p, rep, sets["A"], sets["B"], split=split)
        return TripleScene(p, rep, sets["A"], sets["B+"], sets["B-"], split=split)
    except SceneInvalid as exc:
        raise ConfigInvalid(str(exc), "sets")
