import argparse
import sys
from pathlib import Path

# Add project root to sys.path before importing local modules
current_dir = Path(__file__).resolve().parent
project_root = current_dir.parent

if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from src.utils import add_project_root, dumps_report, write_report
add_project_root()

from src.config.logging_config import capture_numeric_warnings, set_level, setup_logging
from src.config.scene_config import SceneConfig, load_scene_config
from src.config.settings import settings
from src.core.errors import AnosovToolkitError, ConfigInvalid, NotNested
from src.core.types import FactorTag, Verdict
from src.certify import builder
from src.certify.checks import antipodality_audit, ping_pong_injectivity, verify_interactive_pair, verify_interactive_triple
from src.certify.diagnostics import anosov_gap_scan, bend_scan, shrink_diagnostic
from src.certify.scenes import PairScene, TripleScene
from src.geometry.reps import limit_set_sample
from src.groups.presentations import AmalgamPresentation
from src.groups.words import SequenceSpec, alternating_sequence, normal_form, parse_word
from src.groups.tree import base_vertex, normal_form_path, path_to_json, tree_distance, vertex_of, vertex_to_json

logger = setup_logging(__name__)

COMMANDS = ("normal-form", "tree-dist", "limit-set", "certify-pair", "certify-triple", "bend-scan", "gap-scan", "shrink")


class UsageParser(argparse.ArgumentParser):
    """Usage errors exit with status 1 like configuration errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ----------------------------------------------------------------
# Commands
# ----------------------------------------------------------------

def cmd_normal_form(cfg: SceneConfig, out: Path, json_only: bool):
    if not cfg.words:
        raise ConfigInvalid("normal-form needs at least one entry in words", "words")
    p = builder.build_presentation(cfg)
    forms = []
    for text in cfg.words:
        nf = normal_form(parse_word(p, text))
        item = nf.to_json()
        item["input"] = text
        forms.append(item)
    payload = {"command": "normal-form", "forms": forms}
    if len(forms) == 1:
        payload.update({"rl": forms[0]["rl"], "syllables": forms[0]["syllables"]})
    return payload, Verdict.PASS


def cmd_tree_dist(cfg: SceneConfig, out: Path, json_only: bool):
    if len(cfg.words) != 2:
        raise ConfigInvalid("tree-dist needs exactly two words", "words")
    p = builder.build_presentation(cfg)
    kind = FactorTag.A if isinstance(p, AmalgamPresentation) else FactorTag.M
    u, w = (normal_form(parse_word(p, text)) for text in cfg.words)
    v1, v2 = vertex_of(u, kind), vertex_of(w, kind)
    gamma = normal_form(u.inverse().as_word() + w.as_word())
    payload = {
        "command": "tree-dist",
        "vertices": [vertex_to_json(v1), vertex_to_json(v2)],
        "distance": tree_distance(v1, v2),
        "distances_to_base": [tree_distance(base_vertex(p, kind), v) for v in (v1, v2)],
        "relative_length": gamma.rl,
        "path": path_to_json(normal_form_path(gamma)),
    }
    return payload, Verdict.PASS


def cmd_limit_set(cfg: SceneConfig, out: Path, json_only: bool):
    rep = builder.build_rep(cfg)
    ftype = builder.flag_type(cfg, rep.d)
    sample = limit_set_sample(rep, cfg.certifier.limit_depth, ftype)
    audit = antipodality_audit(sample)
    if not json_only:
        sample.to_frame().to_csv(out / "limit_set.csv", index=False)
    payload = {"command": "limit-set", "points": len(sample), "skipped": sample.skipped,
               "type": ftype.to_dict(), "audit": audit}
    return payload, Verdict(audit["verdict"])


def _certify(cfg: SceneConfig, expected):
    scene = builder.build_scene(cfg)
    if not isinstance(scene, expected):
        raise ConfigInvalid(f"scene is a {scene.kind} scene", "fixture")
    verify = verify_interactive_pair if expected is PairScene else verify_interactive_triple
    report = verify(scene)
    payload = {"command": f"certify-{scene.kind}", "scene": scene.label, "report": report.to_dict()}
    depth = cfg.certifier.injectivity_depth
    if depth:
        injectivity = ping_pong_injectivity(scene, depth, report)
        payload["injectivity"] = injectivity.to_dict()
    return payload, report.verdict


def cmd_certify_pair(cfg, out, json_only):
    return _certify(cfg, PairScene)


def cmd_certify_triple(cfg, out, json_only):
    return _certify(cfg, TripleScene)


def cmd_bend_scan(cfg: SceneConfig, out: Path, json_only: bool):
    scene = builder.build_scene(cfg)
    b = cfg.bend
    result = bend_scan(scene, b.direction, b.s_hi, b.iterations, b.ray_points, cfg.gap_length)
    return {"command": "bend-scan", "scene": scene.label, "bend": result.to_dict()}, result.verdict


def cmd_gap_scan(cfg: SceneConfig, out: Path, json_only: bool):
    rep = builder.build_rep(cfg)
    scan = anosov_gap_scan(rep, cfg.gap_length, builder.flag_type(cfg, rep.d), samples=cfg.gap_samples,
                           seed=cfg.seed, floor=cfg.certifier.slope_floor)
    if not json_only:
        scan.to_frame().to_csv(out / "gap_scan.csv", index=False)
    return {"command": "gap-scan", "scan": scan.to_dict()}, scan.verdict


def _letters(p, tag: FactorTag, texts):
    if texts is None:
        return None
    out = []
    for text in texts:
        word = parse_word(p, text)
        syllables = [s for s in word.syllables if s.factor is tag]
        if len(syllables) != len(word.syllables) or len(syllables) > 1:
            raise ConfigInvalid(f"sequence letter {text!r} is not a single {tag.value} element", "sequence")
        out.append(syllables[0].word if syllables else ())
    return out


def cmd_shrink(cfg: SceneConfig, out: Path, json_only: bool):
    scene = builder.build_scene(cfg)
    p = scene.presentation
    s = cfg.sequence
    kind = s.kind if isinstance(scene, PairScene) else "HNN"
    if isinstance(scene, PairScene):
        spec = SequenceSpec(kind, alphas=_letters(p, FactorTag.A, s.alphas), betas=_letters(p, FactorTag.B, s.betas),
                            seed=cfg.seed, letter_length=s.letter_length)
    else:
        spec = SequenceSpec(kind, mus=_letters(p, FactorTag.M, s.mus), epsilons=s.epsilons,
                            seed=cfg.seed, letter_length=s.letter_length)
    length = s.length or settings.SHRINK_LENGTH
    seq = alternating_sequence(spec, length, p)
    try:
        result = shrink_diagnostic(seq, scene)
    except NotNested as exc:
        payload = {"command": "shrink", "scene": scene.label, "verdict": Verdict.FAIL.value,
                   "witness": {"index": exc.index, "margin": exc.margin, "reason": str(exc)}}
        return payload, Verdict.FAIL
    if not json_only:
        result.to_frame().to_csv(out / "shrink.csv", index=False)
    return {"command": "shrink", "scene": scene.label, "shrink": result.to_dict()}, result.verdict


HANDLERS = {
    "normal-form": cmd_normal_form,
    "tree-dist": cmd_tree_dist,
    "limit-set": cmd_limit_set,
    "certify-pair": cmd_certify_pair,
    "certify-triple": cmd_certify_triple,
    "bend-scan": cmd_bend_scan,
    "gap-scan": cmd_gap_scan,
    "shrink": cmd_shrink,
}


def run(command: str, cfg: SceneConfig, out: Path, json_only: bool = False) -> int:
    """Execute one command; returns the process exit code."""
    out.mkdir(parents=True, exist_ok=True)
    payload, verdict = HANDLERS[command](cfg, out, json_only)
    payload["seed"] = cfg.seed
    payload["verdict"] = verdict.value
    text = dumps_report(payload)
    write_report(out / f"{command}.json", payload)
    sys.stdout.write(text)
    logger.info("%s finished: %s", command, verdict.value)
    return verdict.exit_code


def main(argv=None) -> int:
    parser = UsageParser(description="Certify interactive pairs and triples of matrix groups.")
    parser.add_argument("command", choices=COMMANDS, help="Pipeline to run")
    parser.add_argument("--config", required=True, help="Path to the JSON scene file")
    parser.add_argument("--out", help="Output directory (defaults to the scene's output or OUTPUT_DIR)")
    parser.add_argument("--seed", type=int, help="Override the scene seed")
    parser.add_argument("--depth", type=int, help="Override the certifier depth L")
    parser.add_argument("--json-only", action="store_true", help="Write the JSON report only, no CSV artifacts")
    parser.add_argument("--verbose", action="store_true", help="Log per-condition margins (DEBUG)")
    args = parser.parse_args(argv)
    capture_numeric_warnings()
    if args.verbose:
        set_level("DEBUG")

    try:
        cfg = load_scene_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.depth is not None:
            if args.depth < 1:
                raise ConfigInvalid("--depth must be positive", "depth")
            cfg.certifier.depth = args.depth
        out = Path(args.out or cfg.output or settings.OUTPUT_DIR)
        return run(args.command, cfg, out, args.json_only)
    except ConfigInvalid as e:
        logger.error(f"Invalid scene configuration ({e.field}): {e}")
        return 1
    except AnosovToolkitError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
