"""Deterministic synthetic scenarios for exercising the tracker.

Agents are rigid 15-joint stick figures moving along linear or sinusoidal
paths. From the ground truth the generator derives corrupted detections
(coordinate noise, dropped detections, occluded joints with misleading
confidences), exact dense flow fields and well separated appearance features.

Randomness comes from numpy's PCG64 bit generator seeded with ``seed``; the
draws per frame and agent happen in a fixed order independent of the event
lists, so two configs differing only in events share their noise.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .metrics import GroundTruthPerson, GroundTruthSequence
from .revision import FlowField, flow_path, write_flow
from .skeleton import DEFAULT_SKELETON, BBox, Pose, TrackedPose, bbox_from_points
from .tracker import FrameObservations

# Unit-height stick figure in PoseTrack joint order, centred on the pelvis.
TEMPLATE = np.array([
    [-0.08, 0.50], [-0.07, 0.27], [-0.07, 0.03], [0.07, 0.03], [0.07, 0.27],
    [0.08, 0.50], [-0.20, 0.02], [-0.17, -0.13], [-0.11, -0.27], [0.11, -0.27],
    [0.17, -0.13], [0.20, 0.02], [0.00, -0.31], [0.00, -0.39], [0.00, -0.50],
])
HEAD_FRACTION = 0.19  # head_bottom to head_top in template units
FLOW_PAD = 2.0


@dataclass
class AgentSpec:
    start: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    height: float = 80.0
    path: str = "linear"  # or "sinusoidal"
    amplitude: float = 0.0
    period: float = 20.0

    def center(self, t: int) -> np.ndarray:
        v = np.asarray(self.velocity, dtype=float)
        c = np.asarray(self.start, dtype=float) + v * t
        if self.path == "sinusoidal":
            speed = float(np.hypot(*v))
            normal = np.array([-v[1], v[0]]) / speed if speed > 0 else np.array([0.0, 1.0])
            c = c + self.amplitude * math.sin(2 * math.pi * t / self.period) * normal
        return c

    def keypoints(self, t: int) -> np.ndarray:
        return self.center(t) + TEMPLATE * self.height

    @property
    def head_size(self) -> float:
        return HEAD_FRACTION * self.height


@dataclass
class ScenarioConfig:
    num_frames: int = 30
    width: int = 320
    height: int = 240
    agents: list[AgentSpec] = field(default_factory=list)
    # Inclusive frame ranges.
    dropouts: list[tuple[int, int, int]] = field(default_factory=list)     # (agent, first, last)
    absences: list[tuple[int, int, int]] = field(default_factory=list)     # (agent, first, last)
    occlusions: list[tuple[int, int, int, list[int]]] = field(default_factory=list)
    noise: float = 0.0
    self_occlusion_rate: float = 0.0
    feature_dim: int = 64
    feature_separation: float = 200.0
    seed: int = 0
    # Confidence model: uniform ranges for (p_loc, p_avl).
    visible_p_loc: tuple[float, float] = (0.6, 1.0)
    visible_p_avl: tuple[float, float] = (0.9, 1.0)
    occluded_p_loc: tuple[float, float] = (0.8, 1.0)
    occluded_p_avl: tuple[float, float] = (0.0, 0.2)
    hidden_p_loc: tuple[float, float] = (0.2, 0.7)
    hidden_p_avl: tuple[float, float] = (0.0, 0.3)
    occlusion_offset: float = 0.25  # displacement of occluded joints, in agent heights

    def validate(self):
        if self.num_frames < 1 or self.width < 2 or self.height < 2:
            raise ValueError("scenario needs at least one frame and a 2x2 frame")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        if not 0 <= self.self_occlusion_rate <= 1:
            raise ValueError("self_occlusion_rate outside [0, 1]")
        if self.feature_dim < len(self.agents):
            raise ValueError("feature_dim must be at least the number of agents")
        for a in self.agents:
            if a.path not in ("linear", "sinusoidal"):
                raise ValueError(f"unknown path {a.path!r}")
            if not a.height > 0:
                raise ValueError("agent height must be positive")
        n = len(self.agents)
        events = ([("dropout", e) for e in self.dropouts] + [("absence", e) for e in self.absences]
                  + [("occlusion", e) for e in self.occlusions])
        for kind, e in events:
            agent, first, last = e[0], e[1], e[2]
            if not 0 <= agent < n:
                raise ValueError(f"{kind} event {e}: no agent {agent}")
            if not 0 <= first <= last < self.num_frames:
                raise ValueError(f"{kind} event {e}: frame range outside 0..{self.num_frames - 1}")
            if kind == "occlusion" and any(not 0 <= j < len(TEMPLATE) for j in e[3]):
                raise ValueError(f"occlusion event {e}: joint index out of range")

    def uncorrupted(self) -> "ScenarioConfig":
        return replace(self, dropouts=[], occlusions=[], noise=0.0, self_occlusion_rate=0.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        d["agents"] = [AgentSpec(**{**a, "start": tuple(a["start"]),
                                    "velocity": tuple(a.get("velocity", (0.0, 0.0)))})
                       for a in d.get("agents", [])]
        for key in ("dropouts", "absences"):
            d[key] = [tuple(e) for e in d.get(key, [])]
        d["occlusions"] = [(e[0], e[1], e[2], list(e[3])) for e in d.get("occlusions", [])]
        for key in ("visible_p_loc", "visible_p_avl", "occluded_p_loc", "occluded_p_avl",
                    "hidden_p_loc", "hidden_p_avl"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class ScenarioBundle:
    config: ScenarioConfig
    ground_truth: GroundTruthSequence
    observations: list[FrameObservations]
    flows: dict[int, FlowField]
    features: dict[tuple[int, int], np.ndarray]
    # (frame, detection id) -> agent index
    sources: dict[tuple[int, int], int]
    # (frame, detection id, joint) of every joint planted by an occlusion event
    planted: list[tuple[int, int, int]]

    def gt_as_predictions(self) -> dict[int, list[TrackedPose]]:
        return {t: [TrackedPose(g.track_id, g.pose) for g in people]
                for t, people in self.ground_truth.frames.items()}


def _in_ranges(events, agent, t) -> bool:
    return any(e[0] == agent and e[1] <= t <= e[2] for e in events)


def agent_features(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Rows are per-agent features; distinct rows are sqrt(2) * separation apart."""
    n, D = len(cfg.agents), cfg.feature_dim
    base = rng.normal(size=D)
    if n == 0:
        return np.zeros((0, D))
    q, _ = np.linalg.qr(rng.normal(size=(D, n)))
    return base[None, :] + cfg.feature_separation * q.T


def flow_field(cfg: ScenarioConfig, t: int) -> FlowField:
    """Exact flow for the transition t-1 -> t: each agent visible at t-1 paints
    its displacement over its padded box; everything else is static."""
    v = np.zeros((cfg.height, cfg.width, 2))
    for a, agent in enumerate(cfg.agents):
        if _in_ranges(cfg.absences, a, t - 1):
            continue
        kp = agent.keypoints(t - 1)
        box = bbox_from_points(kp, 0.1)
        x0 = max(int(math.floor(box.x_min - FLOW_PAD)), 0)
        y0 = max(int(math.floor(box.y_min - FLOW_PAD)), 0)
        x1 = min(int(math.ceil(box.x_max + FLOW_PAD)), cfg.width - 1)
        y1 = min(int(math.ceil(box.y_max + FLOW_PAD)), cfg.height - 1)
        if x0 > x1 or y0 > y1:
            continue
        v[y0:y1 + 1, x0:x1 + 1] = agent.center(t) - agent.center(t - 1)
    return FlowField(v)


def _uniform(rng, lo_hi, n):
    lo, hi = lo_hi
    return rng.uniform(lo, hi, n)


def generate(cfg: ScenarioConfig) -> ScenarioBundle:
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    feats = agent_features(cfg, rng)
    K = len(TEMPLATE)
    limit = np.array([cfg.width - 1, cfg.height - 1], dtype=float)

    gt_frames: dict[int, list[GroundTruthPerson]] = {}
    observations, flows = [], {}
    features, sources, planted = {}, {}, []
    next_det = 1
    for t in range(cfg.num_frames):
        people, dets, det_feats, det_ids = [], [], [], []
        for a, agent in enumerate(cfg.agents):
            # Fixed draw order per (frame, agent).
            noise = rng.normal(0.0, 1.0, (K, 2)) * cfg.noise
            u_vis = (_uniform(rng, cfg.visible_p_loc, K), _uniform(rng, cfg.visible_p_avl, K))
            u_occ = (_uniform(rng, cfg.occluded_p_loc, K), _uniform(rng, cfg.occluded_p_avl, K))
            u_hid = (_uniform(rng, cfg.hidden_p_loc, K), _uniform(rng, cfg.hidden_p_avl, K))
            hidden = rng.random(K) < cfg.self_occlusion_rate
            angle = rng.uniform(0, 2 * math.pi, K)
            if _in_ranges(cfg.absences, a, t):
                continue
            occluded = np.zeros(K, dtype=bool)
            for e in cfg.occlusions:
                if e[0] == a and e[1] <= t <= e[2]:
                    occluded[list(e[3])] = True
            hidden &= ~occluded
            truth = agent.keypoints(t)
            visible = ~(occluded | hidden)
            gt_pose = Pose(truth, np.where(visible, 1.0, 0.0), np.ones(K), visible,
                           bbox_from_points(truth, 0.1))
            people.append(GroundTruthPerson(a + 1, gt_pose, agent.head_size))
            if _in_ranges(cfg.dropouts, a, t):
                continue
            xy = truth + noise
            shift = cfg.occlusion_offset * agent.height * np.stack([np.cos(angle), np.sin(angle)], 1)
            xy = np.where((occluded | hidden)[:, None], xy + shift, xy)
            xy = np.clip(xy, 0.0, limit)
            p_loc = np.where(occluded, u_occ[0], np.where(hidden, u_hid[0], u_vis[0]))
            p_avl = np.where(occluded, u_occ[1], np.where(hidden, u_hid[1], u_vis[1]))
            det_id = next_det
            next_det += 1
            dets.append(Pose(xy, p_loc, p_avl, np.ones(K, dtype=bool), bbox_from_points(truth, 0.1)))
            det_feats.append(feats[a].copy())
            det_ids.append(det_id)
            features[(t, det_id)] = feats[a].copy()
            sources[(t, det_id)] = a
            planted += [(t, det_id, int(j)) for j in np.nonzero(occluded)[0]]
        gt_frames[t] = people
        flow = flow_field(cfg, t) if t > 0 else None
        if flow is not None:
            flows[t] = flow
        observations.append(FrameObservations(t, dets, det_feats, flow,
                                              (cfg.width, cfg.height), det_ids))
    return ScenarioBundle(cfg, GroundTruthSequence(gt_frames), observations, flows,
                          features, sources, planted)


def write_bundle(bundle: ScenarioBundle, directory):
    """Write gt.json, detections.json, features.txt, flow/ and scenario.json."""
    from .formats import (AnnotationDocument, ImageRecord, record_from_pose,
                          save_annotations, skeleton_category)
    from .reid import write_features

    out = Path(directory)
    (out / "flow").mkdir(parents=True, exist_ok=True)
    cfg = bundle.config
    images = [ImageRecord(t, f"{t:06d}.jpg", cfg.width, cfg.height) for t in range(cfg.num_frames)]
    category = [skeleton_category(DEFAULT_SKELETON)]

    gt_anns = []
    for t, people in sorted(bundle.ground_truth.frames.items()):
        for g in people:
            rec = record_from_pose(g.pose, len(gt_anns) + 1, t, g.track_id, g.head_size,
                                   with_availability=False)
            rec.score = None
            gt_anns.append(rec)
    save_annotations(AnnotationDocument(images, gt_anns, category), out / "gt.json")

    det_anns = []
    for obs in bundle.observations:
        for pose, det_id in zip(obs.detections, obs.detection_ids):
            det_anns.append(record_from_pose(pose, det_id, obs.frame))
    save_annotations(AnnotationDocument(images, det_anns, category), out / "detections.json")

    write_features(bundle.features, out / "features.txt")
    for t, f in sorted(bundle.flows.items()):
        write_flow(f, flow_path(out / "flow", t))
    (out / "scenario.json").write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n",
                                       encoding="utf-8")


def load_scenario(path) -> ScenarioConfig:
    return ScenarioConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# Ready-made scenarios used by the tests and demos.

def clean_scenario(num_frames=50, seed=0) -> ScenarioConfig:
    agents = [AgentSpec((50.0, 120.0), (1.2, 0.2), 70.0),
              AgentSpec((160.0, 110.0), (0.0, 0.5), 80.0, "sinusoidal", 6.0, 25.0),
              AgentSpec((270.0, 125.0), (-1.2, -0.2), 75.0)]
    return ScenarioConfig(num_frames=num_frames, agents=agents, seed=seed)


def dropout_scenario(seed=0) -> ScenarioConfig:
    """Three walkers with twelve isolated single-frame detector misses."""
    cfg = clean_scenario(40, seed)
    drops = [(0, 5, 5), (1, 8, 8), (2, 11, 11), (0, 14, 14), (1, 17, 17), (2, 20, 20),
             (0, 23, 23), (1, 26, 26), (2, 29, 29), (0, 32, 32), (1, 35, 35), (2, 37, 37)]
    return replace(cfg, dropouts=drops, noise=1.0)


def reentry_scenario(seed=0) -> ScenarioConfig:
    """Agents vanish for five frames and come back with unchanged appearance."""
    cfg = clean_scenario(40, seed)
    return replace(cfg, absences=[(0, 8, 12), (1, 18, 22), (2, 28, 32)], noise=1.0)


def occlusion_scenario(seed=0) -> ScenarioConfig:
    """Joints hidden behind objects or other people.

    Occlusion events plant joints with a high location probability but low
    availability; self-occluded joints add mid-range location probabilities.
    """
    cfg = clean_scenario(40, seed)
    occ = [(0, 5, 15, [6, 7, 10, 11]), (1, 10, 25, [0, 1, 4, 5]),
           (2, 20, 35, [6, 11, 13]), (0, 28, 36, [0, 5, 8])]
    return replace(cfg, occlusions=occ, noise=1.0, self_occlusion_rate=0.15)


def crossing_scenario(seed=0) -> ScenarioConfig:
    """Three walkers whose paths cross mid-sequence on offset lanes."""
    agents = [AgentSpec((60.0, 100.0), (4.0, 0.0), 70.0),
              AgentSpec((260.0, 150.0), (-4.0, 0.0), 70.0),
              AgentSpec((160.0, 40.0), (0.0, 3.0), 60.0)]
    return ScenarioConfig(num_frames=10, agents=agents, seed=seed)


PRESETS = {
    "clean": clean_scenario,
    "dropout": dropout_scenario,
    "reentry": reentry_scenario,
    "occlusion": occlusion_scenario,
    "crossing": crossing_scenario,
}
