import pytest

from posetrack import LossConfig, ReidConfig, RevisionConfig, TrackerConfig
from posetrack.config import ConfigError, RunConfig, format_config, load_config, parse_config


def test_defaults_match_published_constants():
    rev, reid, loss = RevisionConfig(), ReidConfig(), LossConfig()
    assert rev.conf_threshold == 0.35
    assert rev.nms_oks_threshold == 0.6
    assert rev.iou_gate == 0.1
    assert reid.distance_threshold == 100.0
    assert loss.alpha == 0.25 and loss.gamma == 2.0
    cfg = RunConfig()
    assert cfg.tracker.conf_threshold == 0.35 and cfg.tracker.nms_oks_threshold == 0.6
    assert cfg.tracker.match_threshold == 0.2 and cfg.tau_factor == 0.5


def test_parse_values_and_comments():
    cfg = parse_config("""
        # comment
        conf_threshold = 0.4   # trailing
        reid.max_age = 12
        enable_reid = false
        confidence_source = location
        flow_provider = identity
    """)
    assert cfg.tracker.conf_threshold == 0.4
    assert cfg.tracker.reid.max_age == 12
    assert cfg.tracker.enable_reid is False
    assert cfg.tracker.confidence_source == "location"
    assert cfg.flow_provider == "identity"


@pytest.mark.parametrize("text, match", [
    ("bogus = 1", "unknown key"),
    ("conf_threshold 0.3", "key = value"),
    ("conf_threshold = high", "conf_threshold"),
    ("conf_threshold = 1.5", "outside"),
    ("enable_reid = maybe", "boolean"),
    ("flow_provider = raft", "flow_provider"),
    ("reid.max_age = 0", "max_age"),
])
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text, "t.cfg")


def test_error_names_line():
    with pytest.raises(ConfigError, match="t.cfg:2"):
        parse_config("conf_threshold = 0.3\nnope = 1", "t.cfg")


def test_format_round_trip(tmp_path):
    cfg = parse_config("conf_threshold = 0.45\nenable_revision = false\ntau_factor = 0.7")
    p = tmp_path / "c.cfg"
    p.write_text(format_config(cfg))
    assert load_config(p) == cfg
    assert format_config(RunConfig()).count("\n") == 16


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/c.cfg")


def test_tracker_config_is_hashable_value():
    assert TrackerConfig() == TrackerConfig()
