import random

import pytest

from crowdlens.clusters import cluster_stream, detect_clusters, dump_clusters, load_clusters, resolve_position
from crowdlens.ingest import CallIndex
from crowdlens.model import Params, TimeGrid


def test_resolve_position_majority_wins():
    assert resolve_position({"A": [100, 200], "B": [50]}) == "A"


def test_resolve_position_tie_breaks_on_earliest_call():
    assert resolve_position({"A": [605], "B": [1220]}) == "A"
    assert resolve_position({"B": [50], "A": [60]}) == "B"


def test_resolve_position_final_tier_is_lexicographic():
    assert resolve_position({"B": [610], "A": [610]}) == "A"


def test_resolve_position_rejects_empty():
    with pytest.raises(ValueError):
        resolve_position({})


def _index_from_observations(grid, obs):
    """obs: list of (t, antenna, user, at)."""
    index = CallIndex.empty(grid)
    for t, antenna_id, user_id, at in obs:
        index.add(t, antenna_id, user_id, at)
    return index


GRID4 = TimeGrid(origin=0, n_steps=4)


def test_detect_clusters_splits_users_by_antenna():
    index = _index_from_observations(GRID4, [
        (0, "A", "u1", 10), (0, "A", "u2", 20), (0, "A", "u3", 30),
        (0, "B", "u4", 40),
    ])
    clusters = detect_clusters(index, 0, Params(scale=1, commitment=1))
    assert [(c.antenna_id, set(c.members)) for c in clusters] == [
        ("A", {"u1", "u2", "u3"}), ("B", {"u4"})]


def test_scale_threshold_is_inclusive():
    obs = [(0, "A", f"u{i}", i) for i in range(20)]
    obs += [(0, "B", f"v{i}", i) for i in range(5)]
    index = _index_from_observations(GRID4, obs)
    clusters = detect_clusters(index, 0, Params())
    assert [c.antenna_id for c in clusters] == ["A"]
    assert len(clusters[0].members) == 20


def test_empty_timestamp_yields_no_clusters():
    index = CallIndex.empty(GRID4)
    assert detect_clusters(index, 2, Params()) == []


def test_multi_antenna_user_appears_in_one_cluster_only():
    index = _index_from_observations(GRID4, [
        (0, "A", "u1", 10), (0, "A", "u1", 50), (0, "B", "u1", 20),
        (0, "B", "u2", 30),
    ])
    clusters = detect_clusters(index, 0, Params(scale=1, commitment=1))
    homes = [c.antenna_id for c in clusters if "u1" in c.members]
    assert homes == ["A"]   # two calls at A beat one at B
    assert clusters[0].observations["u1"] == 2


def _random_index(seed, grid, n_users=30, n_antennas=4):
    rnd = random.Random(seed)
    obs = []
    for t in range(grid.n_steps):
        for i in range(n_users):
            if rnd.random() < 0.7:
                for _ in range(rnd.choice([1, 1, 2])):
                    obs.append((t, f"a{rnd.randrange(n_antennas)}", f"u{i}",
                                t * 3600 + rnd.randrange(3600)))
    return _index_from_observations(grid, obs)


def test_cluster_members_are_disjoint_per_timestamp():
    grid = TimeGrid(origin=0, n_steps=6)
    for seed in range(5):
        index = _random_index(seed, grid)
        for t in range(grid.n_steps):
            clusters = detect_clusters(index, t, Params(scale=1, commitment=1))
            seen = set()
            for c in clusters:
                assert not (c.members & seen)
                seen |= c.members


def test_raising_scale_never_adds_clusters_or_members():
    grid = TimeGrid(origin=0, n_steps=6)
    index = _random_index(99, grid)
    for t in range(grid.n_steps):
        small = {c.antenna_id: c.members
                 for c in detect_clusters(index, t, Params(scale=2, commitment=1))}
        large = {c.antenna_id: c.members
                 for c in detect_clusters(index, t, Params(scale=5, commitment=1))}
        assert set(large) <= set(small)
        for antenna_id, members in large.items():
            assert members == small[antenna_id]


def test_cluster_stream_covers_every_grid_index(fig2a_db):
    grid = TimeGrid(origin=0, n_steps=4)
    index = CallIndex.empty(grid)
    for t, clusters in fig2a_db.items():
        for c in clusters:
            for u in c.members:
                index.add(t, c.antenna_id, u, t * 3600)
    db = cluster_stream(index, grid, Params(scale=1, commitment=1))
    assert set(db) == {0, 1, 2, 3}
    assert [(c.antenna_id, set(c.members)) for c in db[0]] == [
        ("l3", {"u1", "u2", "u3"}), ("lB", {"u4"})]


def test_all_silent_dataset_maps_to_empty_lists():
    grid = TimeGrid(origin=0, n_steps=5)
    db = cluster_stream(CallIndex.empty(grid), grid, Params())
    assert all(db[t] == [] for t in range(5))


def test_parallel_and_sequential_streams_agree():
    grid = TimeGrid(origin=0, n_steps=8)
    index = _random_index(7, grid, n_users=40)
    sequential = cluster_stream(index, grid, Params(scale=3, commitment=3))
    parallel = cluster_stream(index, grid, Params(scale=3, commitment=3), workers=4)
    assert sequential == parallel


def test_cluster_dump_round_trip(tmp_path, fig2a_db):
    path = tmp_path / "clusters.jsonl"
    with open(path, "wb") as fh:
        dump_clusters(fig2a_db, fh)
    with open(path, "rb") as fh:
        loaded = load_clusters(fh)
    assert {t: [(c.antenna_id, c.members) for c in cs] for t, cs in loaded.items()} == \
           {t: [(c.antenna_id, c.members) for c in cs] for t, cs in fig2a_db.items()}
