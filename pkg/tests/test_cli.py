import json
import os
import subprocess
import sys

import pytest

from src.config.settings import settings
from src.run_certify import main

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
CLI_SCRIPT = os.path.join(PROJECT_ROOT, "src", "run_certify.py")


def _run_cli(*args):
    env = os.environ.copy()
    env["PYTHONPATH"] = PROJECT_ROOT + os.pathsep + env.get("PYTHONPATH", "")
    return subprocess.run([sys.executable, CLI_SCRIPT, *args], capture_output=True, text=True,
                          cwd=PROJECT_ROOT, env=env)


def _main(capsys, *args):
    code = main(list(args))
    return code, capsys.readouterr().out


class TestSubprocess:
    def test_schottky_pair_certifies(self, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "schottky", "certifier": {"depth": 3}})
        result = _run_cli("certify-pair", "--config", str(config), "--out", str(tmp_path / "out"))
        assert result.returncode == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["verdict"] == "certified"
        assert report["schema"] == 1
        assert (tmp_path / "out" / "certify-pair.json").exists()

    def test_genus2_amalgam_runs_are_identical(self, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "genus2-amalgam", "certifier": {"depth": 4}})
        runs = [_run_cli("certify-pair", "--config", str(config), "--out", str(tmp_path / name))
                for name in ("first", "second")]
        assert [r.returncode for r in runs] == [0, 0], runs[0].stderr
        assert runs[0].stdout == runs[1].stdout
        assert json.loads(runs[0].stdout)["verdict"] == "certified-at-depth"
        first, second = (tmp_path / name / "certify-pair.json" for name in ("first", "second"))
        assert first.read_bytes() == second.read_bytes()

    def test_falsified_triple_exits_2(self, scene_file, tmp_path):
        config = scene_file({
            "seed": 0, "fixture": "cyclic",
            "sets": {"B-": {"flags": [[[1, 0, 0], [0, 1, 0], [0, 0, 1]]], "r": 0.45}},
        })
        result = _run_cli("certify-triple", "--config", str(config), "--out", str(tmp_path))
        assert result.returncode == 2
        report = json.loads(result.stdout)
        assert report["report"]["witness"]["condition"] == "B_plus_B_minus_disjoint"

    def test_invalid_config_exits_1(self, scene_file, tmp_path):
        config = scene_file({"fixture": "schottky"})
        result = _run_cli("certify-pair", "--config", str(config), "--out", str(tmp_path))
        assert result.returncode == 1
        assert "seed" in result.stderr

    def test_unknown_command_exits_1(self, scene_file):
        config = scene_file({"seed": 0, "fixture": "schottky"})
        result = _run_cli("certify-everything", "--config", str(config))
        assert result.returncode == 1


class TestCommands:
    def test_certify_leaves_settings_alone(self, capsys, scene_file, tmp_path):
        before = settings.FALSIFY_TOL
        config = scene_file({"seed": 0, "fixture": "schottky", "certifier": {"depth": 3, "falsify_tol": 1e-6}})
        code, _ = _main(capsys, "certify-pair", "--config", str(config), "--out", str(tmp_path))
        assert code == 0
        assert settings.FALSIFY_TOL == before

    def test_normal_form(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "sl2z", "words": ["S U S"]})
        code, out = _main(capsys, "normal-form", "--config", str(config), "--out", str(tmp_path))
        assert code == 0
        payload = json.loads(out)
        assert payload["rl"] == 3
        assert len(payload["syllables"]) == 3

    def test_normal_form_needs_words(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "sl2z"})
        code, _ = _main(capsys, "normal-form", "--config", str(config), "--out", str(tmp_path))
        assert code == 1

    def test_tree_distance(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "bs12", "words": ["a", "f a f"]})
        code, out = _main(capsys, "tree-dist", "--config", str(config), "--out", str(tmp_path))
        assert code == 0
        payload = json.loads(out)
        assert payload["distances_to_base"] == [0, 2]
        assert payload["distance"] == 2

    def test_sl2z_pair_is_inconclusive(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "sl2z"})
        code, out = _main(capsys, "certify-pair", "--config", str(config), "--out", str(tmp_path), "--depth", "3")
        assert code == 3
        assert json.loads(out)["verdict"] == "inconclusive"

    def test_wrong_scene_kind(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "cyclic"})
        code, _ = _main(capsys, "certify-pair", "--config", str(config), "--out", str(tmp_path))
        assert code == 1

    def test_bad_depth(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "schottky"})
        code, _ = _main(capsys, "certify-pair", "--config", str(config), "--out", str(tmp_path), "--depth", "0")
        assert code == 1

    def test_gap_scan_writes_csv(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "cyclic", "gap_length": 6})
        code, out = _main(capsys, "gap-scan", "--config", str(config), "--out", str(tmp_path))
        assert code == 0
        assert json.loads(out)["scan"]["verdict"] == "PASS"
        assert (tmp_path / "gap_scan.csv").exists()

    def test_json_only_skips_csv(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "schottky", "certifier": {"limit_depth": 3}})
        code, out = _main(capsys, "limit-set", "--config", str(config), "--out", str(tmp_path), "--json-only")
        assert code == 0
        assert json.loads(out)["audit"]["verdict"] == "PASS"
        assert not (tmp_path / "limit_set.csv").exists()
        assert (tmp_path / "limit-set.json").exists()

    def test_shrink_along_stable_letter(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 0, "fixture": "cyclic",
                             "sequence": {"kind": "HNN", "epsilons": [1], "length": 6}})
        code, out = _main(capsys, "shrink", "--config", str(config), "--out", str(tmp_path))
        assert code == 0
        assert json.loads(out)["shrink"]["verdict"] == "PASS"
        assert (tmp_path / "shrink.csv").exists()

    def test_output_defaults_to_settings(self, capsys, scene_file, mock_settings):
        config = scene_file({"seed": 0, "fixture": "cyclic", "gap_length": 4})
        code, _ = _main(capsys, "gap-scan", "--config", str(config), "--json-only")
        assert code == 0
        assert (mock_settings.OUTPUT_DIR / "gap-scan.json").exists()

    def test_reports_are_deterministic(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 5, "fixture": "schottky", "certifier": {"depth": 2}})
        args = ("certify-pair", "--config", str(config), "--out", str(tmp_path), "--json-only")
        first = _main(capsys, *args)[1]
        second = _main(capsys, *args)[1]
        assert first == second

    def test_seed_override(self, capsys, scene_file, tmp_path):
        config = scene_file({"seed": 1, "fixture": "cyclic", "gap_length": 4})
        _, out = _main(capsys, "gap-scan", "--config", str(config), "--out", str(tmp_path), "--seed", "9")
        assert json.loads(out)["seed"] == 9
