import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from posetrack import Gallery, ReidConfig
from posetrack.reid import read_features, write_features


def test_insert_examples():
    g = Gallery()
    g.insert(1, [0.0, 0.0], 3)
    assert len(g) == 1
    g.insert(1, [5.0, 5.0], 4)
    assert len(g) == 1 and g.entries[1].feature.tolist() == [5.0, 5.0] and g.entries[1].last_seen == 4
    g.insert(2, [1.0, 1.0], 4)
    assert len(g) == 2


def test_dimension_checked():
    g = Gallery().insert(1, np.zeros(4), 0)
    with pytest.raises(ValueError):
        g.insert(2, np.zeros(3), 0)
    with pytest.raises(ValueError):
        g.retrieve(np.zeros(5))


def test_retrieve_examples():
    q = np.array([1.0, 2.0, 3.0])
    assert Gallery().insert(9, q, 0).retrieve(q) == 9

    g = Gallery().insert(1, [100.0, 0.0], 0)
    assert g.retrieve([0.0, 0.0], ReidConfig(100.0)) is None
    assert 1 in g

    g = Gallery().insert(1, [50.0, 0.0], 0).insert(2, [5.0, 0.0], 0)
    assert g.retrieve([0.0, 0.0]) == 2


def test_retrieve_removes_and_breaks_ties():
    g = Gallery().insert(3, [1.0, 0.0], 5).insert(2, [-1.0, 0.0], 7).insert(4, [0.0, 1.0], 5)
    assert g.retrieve([0.0, 0.0]) == 3
    assert g.retrieve([0.0, 0.0]) == 4
    assert g.retrieve([0.0, 0.0]) == 2
    assert g.retrieve([0.0, 0.0]) is None


def test_prune_boundary():
    cfg = ReidConfig(max_age=30)
    g = Gallery().insert(1, [0.0], 10).insert(2, [0.0], 9).insert(3, [0.0], 40)
    g.prune(40, cfg)
    assert sorted(g.entries) == [1, 3]
    g.prune(41, cfg)
    assert sorted(g.entries) == [3]


def test_config_validation():
    with pytest.raises(ValueError):
        ReidConfig(distance_threshold=0)
    with pytest.raises(ValueError):
        ReidConfig(max_age=0)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 20), st.floats(-50, 50), st.floats(-50, 50)),
                min_size=1, max_size=12),
       st.floats(-50, 50), st.floats(-50, 50))
def test_retrieve_properties(entries, qx, qy):
    g = Gallery()
    for tid, x, y in entries:
        g.insert(tid, [x, y], 0)
    before = set(g.entries)
    hit = g.retrieve([qx, qy], ReidConfig(1e9))
    assert hit in before
    assert hit not in g
    # An exact duplicate always yields a match at distance zero.
    tid, x, y = entries[-1]
    g.insert(tid, [x, y], 1)
    ids, dist = g.distances([x, y])
    hit = g.retrieve([x, y], ReidConfig(1e-9))
    assert hit is not None and dist[ids.index(hit)] == 0.0


def test_feature_file_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    records = {(t, d): rng.normal(size=6) * 100 for t in range(3) for d in (1, 2)}
    path = tmp_path / "f.txt"
    write_features(records, path)
    back = read_features(path)
    assert back.keys() == records.keys()
    assert all(np.array_equal(back[k], records[k]) for k in records)
    text = path.read_text()
    write_features(back, path)
    assert path.read_text() == text


@pytest.mark.parametrize("text, match", [
    ("0, 1, 1.0\n0, 1, 2.0\n", "duplicate"),
    ("0, 1, 1.0, 2.0\n1, 1, 2.0\n", "dimension"),
    ("0, x, 1.0\n", "malformed"),
    ("0, 1\n", "non-empty"),
    ("0, 1, nan\n", "finite"),
])
def test_feature_file_errors(tmp_path, text, match):
    path = tmp_path / "f.txt"
    path.write_text(text)
    with pytest.raises(ValueError, match=match):
        read_features(path)
