import json
import subprocess
import sys

import pytest
from PIL import Image

from posetrack.cli import main
from posetrack.synth import ScenarioConfig, AgentSpec


def total_line(text):
    return text.strip().splitlines()[-1].split()


@pytest.fixture(scope="module")
def dropout_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("dropout")
    assert main(["synth", "--preset", "dropout", "--out", str(d)]) == 0
    return d


def test_eval_uncorrupted_bundle(tmp_path, capsys):
    b = tmp_path / "b"
    assert main(["synth", "--preset", "clean", "--uncorrupted", "--out", str(b)]) == 0
    assert main(["track", str(b / "detections.json"), "--out", str(tmp_path / "t.json")]) == 0
    capsys.readouterr()
    assert main(["eval", str(tmp_path / "t.json"), str(b / "gt.json"), "--out", str(tmp_path / "r")]) == 0
    out = capsys.readouterr().out
    assert total_line(out)[:3] == ["total", "100.0", "100.0"]
    assert (tmp_path / "r" / "report.txt").read_text() == out
    report = json.loads((tmp_path / "r" / "report.json").read_text())
    assert report["mota"]["total"]["mota"] == 1.0


def test_revision_reduces_misses(dropout_dir, tmp_path, capsys):
    fn = {}
    for label, extra in (("on", []), ("off", ["--disable-revision"])):
        tracked = tmp_path / f"{label}.json"
        assert main(["track", str(dropout_dir / "detections.json"), "--flow-dir", str(dropout_dir / "flow"),
                     "--features", str(dropout_dir / "features.txt"), "--out", str(tracked)] + extra) == 0
        capsys.readouterr()
        assert main(["eval", str(tracked), str(dropout_dir / "gt.json")]) == 0
        fn[label] = int(total_line(capsys.readouterr().out)[4])
    assert fn["on"] < fn["off"]


def test_config_file_is_used(dropout_dir, tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("enable_revision = false\nflow_provider = identity\n")
    tracked = tmp_path / "t.json"
    assert main(["track", str(dropout_dir / "detections.json"), "--config", str(cfg),
                 "--out", str(tracked)]) == 0
    assert main(["eval", str(tracked), str(dropout_dir / "gt.json")]) == 0
    assert int(total_line(capsys.readouterr().out)[4]) == 180


def test_unknown_flag_is_usage_error(capsys):
    assert main(["track", "--bogus"]) == 1
    assert "usage:" in capsys.readouterr().err
    assert main([]) == 1


def test_usage_errors_from_argument_combinations(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path)]) == 1
    cfg = tmp_path / "c.cfg"
    cfg.write_text("flow_provider = file\n")
    assert main(["track", "x.json", "--config", str(cfg), "--out", str(tmp_path / "o.json")]) == 1
    assert "--flow-dir" in capsys.readouterr().err


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["track", str(bad), "--out", str(tmp_path / "o.json")]) == 2
    assert "line 1 column 2" in capsys.readouterr().err
    assert main(["eval", str(tmp_path / "missing.json"), str(bad)]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("conf_threshold = 7\n")
    assert main(["eval", str(bad), str(bad), "--config", str(cfg)]) == 2
    scen = tmp_path / "s.json"
    scen.write_text('{"num_frames": 0}')
    assert main(["synth", str(scen), "--out", str(tmp_path / "s")]) == 2


def test_synth_from_scenario_file_with_seed(tmp_path):
    cfg = ScenarioConfig(num_frames=4, width=64, height=48, agents=[AgentSpec((20.0, 24.0), (2.0, 0.0), 30.0)],
                         noise=1.0, feature_dim=4)
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps(cfg.to_dict()))
    assert main(["synth", str(scen), "--seed", "9", "--out", str(tmp_path / "a")]) == 0
    assert json.loads((tmp_path / "a" / "scenario.json").read_text())["seed"] == 9
    assert sorted(p.name for p in (tmp_path / "a" / "flow").iterdir()) == [
        "flow_000001.bin", "flow_000002.bin", "flow_000003.bin"]


def test_overlay_writes_images(tmp_path):
    from pathlib import Path
    tracked = Path(__file__).parent / "fixtures" / "tracked.json"
    assert main(["overlay", str(tracked), "--out", str(tmp_path / "ov")]) == 0
    files = sorted((tmp_path / "ov").iterdir())
    assert [f.name for f in files] == ["frame_000000.png", "frame_000001.png", "frame_000002.png"]
    img = Image.open(files[0])
    assert img.size == (48, 36)
    assert len(img.getcolors(maxcolors=4096)) > 1
    assert main(["overlay", str(tracked), "--out", str(tmp_path / "o2"), "--width", "10"]) == 1
    assert main(["overlay", str(tracked), "--out", str(tmp_path / "o3"),
                 "--width", "100", "--height", "80"]) == 0
    assert Image.open(tmp_path / "o3" / "frame_000000.png").size == (100, 80)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "posetrack", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("track", "eval", "synth", "overlay"):
        assert cmd in res.stdout
