"""Run configuration: a flat ``key = value`` text file with typed validation.

Recognised keys (defaults in brackets)::

    conf_threshold              keypoint confidence cut-off                 [0.35]
    confidence_source           fused | location                           [fused]
    nms_oks_threshold           OKS above which detections are suppressed  [0.6]
    oks_visibility_threshold    min confidence for a joint to enter OKS     [0.0]
    match_threshold             minimum OKS for an accepted association    [0.2]
    revival_margin              box margin around revived keypoints         [0.1]
    revision.score_threshold    min average confidence of a revived box    [0.35]
    revision.overlap_threshold  duplicate cut-off for revived boxes         [0.5]
    revision.iou_gate           IoU at or below which overlap is zero       [0.1]
    reid.distance_threshold     max Euclidean feature distance (exclusive) [100]
    reid.max_age                frames a lost track stays retrievable       [30]
    enable_revision             true | false                               [true]
    enable_reid                 true | false                               [true]
    history_depth               poses kept per track                        [2]
    flow_provider               file | constant_velocity | identity        [constant_velocity]
    tau_factor                  evaluation radius in head lengths           [0.5]

Blank lines and ``#`` comments are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .metrics import DEFAULT_TAU
from .reid import ReidConfig
from .revision import RevisionConfig
from .tracker import TrackerConfig

FLOW_PROVIDERS = ("file", "constant_velocity", "identity")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    flow_provider: str = "constant_velocity"
    tau_factor: float = DEFAULT_TAU

    def __post_init__(self):
        if self.flow_provider not in FLOW_PROVIDERS:
            raise ConfigError(f"flow_provider must be one of {FLOW_PROVIDERS}")
        if not self.tau_factor > 0:
            raise ConfigError("tau_factor must be positive")


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# key -> (section, attribute, parser); section None means RunConfig itself.
_KEYS = {
    "conf_threshold": ("revision", "conf_threshold", float),
    "nms_oks_threshold": ("revision", "nms_oks_threshold", float),
    "revival_margin": ("revision", "margin", float),
    "revision.score_threshold": ("revision", "score_threshold", float),
    "revision.overlap_threshold": ("revision", "overlap_threshold", float),
    "revision.iou_gate": ("revision", "iou_gate", float),
    "reid.distance_threshold": ("reid", "distance_threshold", float),
    "reid.max_age": ("reid", "max_age", int),
    "confidence_source": ("tracker", "confidence_source", str),
    "oks_visibility_threshold": ("tracker", "oks_visibility_threshold", float),
    "match_threshold": ("tracker", "match_threshold", float),
    "enable_revision": ("tracker", "enable_revision", _bool),
    "enable_reid": ("tracker", "enable_reid", _bool),
    "history_depth": ("tracker", "history_depth", int),
    "flow_provider": (None, "flow_provider", str),
    "tau_factor": (None, "tau_factor", float),
}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict[str, dict] = {"revision": {}, "reid": {}, "tracker": {}, None: {}}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        section, attr, parse = _KEYS[key]
        try:
            values[section][attr] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
    try:
        revision = RevisionConfig(**values["revision"])
        reid = ReidConfig(**values["reid"])
        tracker = TrackerConfig(revision=revision, reid=reid, **values["tracker"])
        return RunConfig(tracker, **values[None])
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def format_config(cfg: RunConfig) -> str:
    sections = {"revision": cfg.tracker.revision, "reid": cfg.tracker.reid,
                "tracker": cfg.tracker, None: cfg}
    lines = []
    for key, (section, attr, _) in _KEYS.items():
        v = getattr(sections[section], attr)
        lines.append(f"{key} = {str(v).lower() if isinstance(v, bool) else v}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: RunConfig, **tracker_changes) -> RunConfig:
    return replace(cfg, tracker=replace(cfg.tracker, **tracker_changes))
