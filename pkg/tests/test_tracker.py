import numpy as np
import pytest

from posetrack import (DEFAULT_SKELETON, FlowField, FrameObservations, PoseTracker, TrackerConfig,
                       associate, filter_keypoints, oks_nms, run)
from posetrack.revision import IdentityFlowProvider

from helpers import figure

SIZE = (320, 240)


def obs(t, poses, feats=None, flow=None):
    return FrameObservations(t, list(poses), feats, flow, SIZE)


def test_identical_detection_keeps_id():
    tr = PoseTracker()
    p = figure(100, 100)
    assert [x.track_id for x in tr.step(obs(0, [p]))] == [1]
    assert [x.track_id for x in tr.step(obs(1, [p]))] == [1]


def test_single_dropout_revived_with_exact_flow():
    v = (4.0, 1.0)
    poses = [figure(60 + v[0] * t, 100 + v[1] * t) for t in range(4)]
    flow = FlowField.uniform(*SIZE, *v)
    seq = [obs(0, [poses[0]]), obs(1, [poses[1]], flow=flow), obs(2, [], flow=flow),
           obs(3, [poses[3]], flow=flow)]
    out = run(seq, cfg=TrackerConfig(enable_reid=False))
    assert [[x.track_id for x in out[t]] for t in range(4)] == [[1], [1], [1], [1]]
    np.testing.assert_allclose(out[2][0].pose.xy, poses[2].xy, atol=1e-9)


def test_revival_lasts_one_frame():
    flow = FlowField.uniform(*SIZE, 0.0, 0.0)
    seq = [obs(0, [figure(100, 100)])] + [obs(t, [], flow=flow) for t in (1, 2, 3)]
    out = run(seq, cfg=TrackerConfig(enable_reid=False))
    assert [len(out[t]) for t in range(4)] == [1, 1, 0, 0]


def test_reentry_restored_by_retrieve():
    feat = np.full(8, 3.0)
    other = np.full(8, 500.0)
    seq = [obs(t, [figure(100, 100), figure(250, 100)], [feat, other]) for t in range(3)]
    seq += [obs(t, [figure(250, 100)], [other]) for t in range(3, 8)]
    seq += [obs(t, [figure(250, 100), figure(110, 100)], [other, feat]) for t in range(8, 10)]
    for revision in (False, True):
        out = run(seq, cfg=TrackerConfig(enable_revision=revision), flow_provider=IdentityFlowProvider())
        assert sorted(x.track_id for x in out[9]) == [1, 2]
        assert all(len(out[t]) == 1 for t in range(4, 8))
        no_reid = run(seq, cfg=TrackerConfig(enable_revision=revision, enable_reid=False),
                      flow_provider=IdentityFlowProvider())
        assert sorted(x.track_id for x in no_reid[9]) == [2, 3]


def test_gallery_expires_after_max_age():
    from posetrack import ReidConfig
    feat = np.zeros(4)
    seq = [obs(0, [figure(100, 100)], [feat])] + [obs(t, [], []) for t in range(1, 5)]
    seq.append(obs(5, [figure(100, 100)], [feat]))
    cfg = TrackerConfig(enable_revision=False, reid=ReidConfig(max_age=3))
    assert [x.track_id for x in run(seq, cfg=cfg)[5]] == [2]
    cfg = TrackerConfig(enable_revision=False, reid=ReidConfig(max_age=5))
    assert [x.track_id for x in run(seq, cfg=cfg)[5]] == [1]


def test_run_empty_and_single_frame():
    assert run([]) == {}
    dets = [figure(40, 60), figure(160, 120), figure(280, 180)]
    assert [x.track_id for x in run([obs(0, dets)])[0]] == [1, 2, 3]


def test_crossing_scenario_hand_trace(bundles):
    # Agents 0, 1, 2 are detected in that order at frame 0, so they receive
    # ids 1, 2, 3 and the uncorrupted detections are reported unchanged.
    b = bundles("crossing")
    out = run(b.observations)
    for o in b.observations:
        assert [x.track_id for x in out[o.frame]] == [1, 2, 3]
        for x, det, det_id in zip(out[o.frame], o.detections, o.detection_ids):
            assert b.sources[(o.frame, det_id)] == x.track_id - 1
            assert np.array_equal(x.pose.xy, det.xy)


def baseline(sequence, cfg):
    """Independent filter + NMS + gated Hungarian tracker."""
    tracks, next_id, out = {}, 1, {}
    for o in sequence:
        dets = [filter_keypoints(d, cfg.conf_threshold) for d in o.detections]
        dets = oks_nms([d for d in dets if d.num_present], DEFAULT_SKELETON, cfg.nms_oks_threshold)
        ids = sorted(tracks)
        res = associate([tracks[i] for i in ids], dets, DEFAULT_SKELETON,
                        threshold=cfg.match_threshold, row_ids=ids)
        new = {tid: dets[j] for tid, j, _ in res.matches}
        for j in res.unmatched_detections:
            new[next_id] = dets[j]
            next_id += 1
        tracks = new
        out[o.frame] = sorted((tid, p.xy.tobytes()) for tid, p in new.items())
    return out


@pytest.mark.parametrize("name", ["dropout", "reentry", "occlusion"])
def test_ablation_equivalence(bundles, name):
    cfg = TrackerConfig(enable_revision=False, enable_reid=False)
    b = bundles(name)
    got = {t: [(x.track_id, x.pose.xy.tobytes()) for x in v] for t, v in run(b.observations, cfg=cfg).items()}
    assert got == baseline(b.observations, cfg)


@pytest.mark.parametrize("name", ["dropout", "reentry", "occlusion"])
def test_one_pose_per_id_and_ids_stick_to_agents(bundles, name):
    b = bundles(name)
    out = run(b.observations)
    owner = {}
    for t, poses in out.items():
        ids = [x.track_id for x in poses]
        assert len(ids) == len(set(ids))
        people = b.ground_truth.frames[t]
        for x in poses:
            centre = np.mean(x.pose.xy[x.pose.present], axis=0)
            dist = {g.track_id: np.linalg.norm(np.mean(g.pose.xy, 0) - centre) for g in people}
            agent = min(dist, key=dist.get, default=None)
            # A revived pose of someone who just left has nobody underneath.
            if agent is None or dist[agent] > 20:
                continue
            assert owner.setdefault(x.track_id, agent) == agent


def test_frame_order_and_feature_count_checked():
    tr = PoseTracker()
    tr.step(obs(3, []))
    with pytest.raises(ValueError):
        tr.step(obs(3, []))
    with pytest.raises(ValueError):
        PoseTracker().step(obs(0, [figure(100, 100)], [np.zeros(2), np.zeros(2)]))


def test_config_validation_and_threshold_copy():
    with pytest.raises(ValueError):
        TrackerConfig(confidence_source="avl")
    with pytest.raises(ValueError):
        TrackerConfig(match_threshold=2.0)
    cfg = TrackerConfig().with_threshold(0.5)
    assert cfg.conf_threshold == 0.5 and TrackerConfig().conf_threshold == 0.35


def test_location_source_keeps_low_availability_joints():
    p = figure(100, 100, p_loc=0.9, p_avl=0.1)
    assert run([obs(0, [p])])[0] == []
    out = run([obs(0, [p])], cfg=TrackerConfig(confidence_source="location"))
    assert out[0][0].pose.num_present == 15
