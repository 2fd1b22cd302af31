import random

import pytest

from crowdlens.crowds import (CandidateCrowd, ChainCluster, Crowd, candidate_cluster_search,
                              crowd_from_dict, crowd_to_dict, dump_crowds, existence_step,
                              is_closed, mine_closed_crowds, replay_chain)
from crowdlens.model import Params
from crowdlens.oracle import oracle_mine

from conftest import make_cluster


def test_existence_decay_is_the_carry_ratio():
    assert existence_step(1.0, 1, 3, False) == pytest.approx(1 / 3)


def test_existence_decay_compounds_over_silent_steps():
    assert existence_step(0.5, 2, 3, False) == pytest.approx(1 / 3)


def test_observation_resets_probability_to_one():
    assert existence_step(0.07, 5, 10, True) == 1.0


def test_empty_previous_cluster_is_an_error():
    with pytest.raises(ValueError):
        existence_step(1.0, 0, 0, False)


def test_carried_count_bounds_are_checked():
    with pytest.raises(ValueError):
        existence_step(1.0, 4, 3, False)


def test_replay_tracks_join_and_decay():
    chain = [frozenset(["u1", "u2", "u3"]), frozenset(["u2", "u4"])]
    probs, history, ratios = replay_chain(chain, eps_p=0.2)
    assert ratios == [pytest.approx(1 / 3)]
    assert probs == {"u1": pytest.approx(1 / 3), "u2": 1.0,
                     "u3": pytest.approx(1 / 3), "u4": 1.0}
    assert history["u4"] == [0.0, 1.0]


def test_replay_drops_below_threshold_for_good():
    chain = [frozenset(["a", "b"]), frozenset(["b"]), frozenset(["a", "b"])]
    probs, history, _ = replay_chain(chain, eps_p=0.6)
    # "a" decays to 0.5 < 0.6 at step 2 and may not rejoin on re-observation
    assert "a" not in probs
    assert set(probs) == {"b"}


def _fig2a_candidate(fig2a_db):
    return CandidateCrowd.seed(fig2a_db[0][0])


def test_extension_admissible_with_joiner_counted(fig2a_db):
    candidate = _fig2a_candidate(fig2a_db)
    params = Params(scale=1, lifetime=4, commitment=4, commitment_probability=0.2)
    extensions = candidate_cluster_search(candidate, fig2a_db[1], params)
    assert len(extensions) == 1
    state = extensions[0].existence
    assert state.probabilities == {"u1": pytest.approx(1 / 3), "u2": 1.0,
                                   "u3": pytest.approx(1 / 3), "u4": 1.0}
    assert extensions[0].committed == {"u1", "u2", "u3", "u4"}


def test_extension_blocked_when_ratio_misses_commitment_probability(fig2a_db):
    candidate = _fig2a_candidate(fig2a_db)
    params = Params(scale=1, lifetime=4, commitment=4, commitment_probability=0.5)
    assert candidate_cluster_search(candidate, fig2a_db[1], params) == []


def test_disjoint_extension_is_never_admissible(fig2a_db):
    candidate = _fig2a_candidate(fig2a_db)
    stranger = make_cluster(1, "X", [f"s{i}" for i in range(30)])
    params = Params(scale=1, lifetime=4, commitment=1, commitment_probability=0.2)
    assert candidate_cluster_search(candidate, [stranger], params) == []


def _crowd(start, antennas, committed=("u1",)):
    chain = tuple(ChainCluster(start + i, a, frozenset(committed))
                  for i, a in enumerate(antennas))
    return Crowd(chain=chain, committed=frozenset(committed))


def test_suffix_of_a_co_terminal_crowd_is_not_closed():
    c2 = _crowd(0, ["a", "b", "c", "d", "e"])
    c3 = _crowd(1, ["b", "c", "d", "e"])
    assert not is_closed(c3, [c2])


def test_identical_crowd_is_not_closed():
    c = _crowd(0, ["a", "b", "c", "d"])
    assert not is_closed(c, [_crowd(0, ["a", "b", "c", "d"])])


def test_earlier_ending_prefix_lives_in_another_bucket():
    candidate = _crowd(0, ["a", "b", "c", "d"])          # ends at 3
    other_bucket_peer = _crowd(1, ["b", "c", "d"])       # also ends at 3
    assert is_closed(candidate, [other_bucket_peer])


def test_static_single_antenna_chain_is_not_a_crowd():
    db = {t: [make_cluster(t, "A", ["u1", "u2", "u3"])] for t in range(6)}
    params = Params(scale=1, lifetime=2, commitment=1, commitment_probability=0.2)
    assert mine_closed_crowds(db, params) == []


def test_fig2a_mining_follows_the_merged_group(fig2a_db, fig2a_params):
    crowds = mine_closed_crowds(fig2a_db, fig2a_params)
    sequences = {c.antenna_sequence() for c in crowds}
    assert ("l3", "l7", "l2", "l8") in sequences
    merged = next(c for c in crowds if c.antenna_sequence()[0] == "l3")
    assert merged.committed == {"u1", "u2", "u3", "u4"}
    vectors = merged.existence_vectors(fig2a_params.commitment_probability)
    assert vectors["u4"] == [0.0, 1.0, 0.5, pytest.approx(1 / 3)]
    assert vectors["u3"][1] == pytest.approx(1 / 3)


def test_mining_requires_valid_params(fig2a_db):
    with pytest.raises(ValueError, match="lifetime below 2"):
        mine_closed_crowds(fig2a_db, Params(lifetime=1))


def test_undersized_clusters_are_ignored(fig2a_db):
    # scale 2 drops the singleton cluster, so no chain can start from it
    params = Params(scale=2, lifetime=2, commitment=2, commitment_probability=0.2,
                    min_locations=2)
    crowds = mine_closed_crowds(fig2a_db, params)
    assert all(len(link.observed) >= 2 for c in crowds for link in c.chain)


def random_instance(rnd):
    n_users = rnd.randint(4, 15)
    n_antennas = rnd.randint(2, 5)
    n_ts = rnd.randint(3, 10)
    users = [f"u{i}" for i in range(n_users)]
    antennas = [f"a{i}" for i in range(n_antennas)]
    db = {}
    for t in range(n_ts):
        at_antenna = {}
        for u in users:
            if rnd.random() < 0.75:
                at_antenna.setdefault(rnd.choice(antennas), set()).add(u)
        db[t] = [make_cluster(t, a, us) for a, us in sorted(at_antenna.items())]
    return db


def random_params(rnd):
    scale = rnd.choice([1, 2, 3])
    return Params(scale=scale, lifetime=rnd.choice([2, 3, 4]),
                  commitment=rnd.randint(0, scale),
                  commitment_probability=rnd.choice(
                      [0.05, 0.1, 0.2, 1 / 3, 0.4, 0.5, 0.75, 1.0]),
                  min_locations=rnd.choice([2, 3]))


def crowd_key(crowds):
    return sorted((tuple((link.t, link.antenna_id) for link in c.chain), c.committed)
                  for c in crowds)


def test_miner_matches_oracle_on_small_instances():
    rnd = random.Random(424242)
    for _ in range(30):
        db = random_instance(rnd)
        params = random_params(rnd)
        assert crowd_key(mine_closed_crowds(db, params)) == crowd_key(oracle_mine(db, params))


def test_stricter_thresholds_only_shrink_or_split():
    # every crowd emitted at stricter (eps_p, eps_ci) replays admissibly at looser values
    rnd = random.Random(31337)
    for _ in range(20):
        db = random_instance(rnd)
        loose = Params(scale=2, lifetime=2, commitment=1,
                       commitment_probability=0.1)
        strict = Params(scale=2, lifetime=2, commitment=2,
                        commitment_probability=0.4)
        for crowd in mine_closed_crowds(db, strict):
            seq = [link.observed for link in crowd.chain]
            probs, _, ratios = replay_chain(seq, loose.commitment_probability)
            assert all(r >= loose.commitment_probability for r in ratios)
            assert len(probs) >= loose.commitment


def test_crowd_dump_round_trip(fig2a_db, fig2a_params, tmp_path):
    crowds = mine_closed_crowds(fig2a_db, fig2a_params)
    path = tmp_path / "crowds.jsonl"
    with open(path, "wb") as fh:
        dump_crowds(crowds, fh)
    lines = path.read_bytes().splitlines()
    assert len(lines) == len(crowds)
    import json
    payload = json.loads(lines[0])
    assert set(payload) == {"start", "end", "chain", "committed", "lifetime",
                            "distinct_antennas"}
    assert crowd_from_dict(payload).antenna_sequence() == crowds[0].antenna_sequence()


def test_crowd_dict_shape(fig2a_db, fig2a_params):
    crowd = mine_closed_crowds(fig2a_db, fig2a_params)[0]
    payload = crowd_to_dict(crowd)
    assert payload["lifetime"] == crowd.end - crowd.start + 1
    assert payload["distinct_antennas"] == len(set(crowd.antenna_sequence()))
