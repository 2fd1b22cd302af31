import pytest

from crowdlens.events import are_connected
from crowdlens.model import Params
from crowdlens.oracle import oracle_components, oracle_mine

from conftest import make_cluster


def test_single_cluster_db_yields_nothing():
    db = {0: [make_cluster(0, "A", ["u1", "u2"])]}
    assert oracle_mine(db, Params(scale=1, lifetime=2, commitment=1)) == []


def test_zero_carry_chains_die_immediately():
    db = {0: [make_cluster(0, "A", ["u1", "u2"])],
          1: [make_cluster(1, "B", ["u3", "u4"])]}
    params = Params(scale=1, lifetime=2, commitment=1, commitment_probability=0.2)
    assert oracle_mine(db, params) == []


def test_oversized_instance_is_rejected():
    db = {t: [make_cluster(t, "A", ["u"])] for t in range(11)}
    with pytest.raises(ValueError, match="too large"):
        oracle_mine(db, Params(scale=1, commitment=1))
    db = {0: [make_cluster(0, "A", [f"u{i}" for i in range(16)])]}
    with pytest.raises(ValueError, match="too large"):
        oracle_mine(db, Params(scale=1, commitment=1))


def test_oracle_respects_param_validation():
    db = {0: [make_cluster(0, "A", ["u1"])]}
    with pytest.raises(ValueError, match="commitment exceeds scale"):
        oracle_mine(db, Params(scale=1, commitment=5))


def test_fig2a_oracle_output(fig2a_db, fig2a_params):
    crowds = oracle_mine(fig2a_db, fig2a_params)
    assert {c.antenna_sequence() for c in crowds} == {
        ("l3", "l7", "l2", "l8"), ("lB", "l7", "l2", "l8")}


def test_components_of_empty_input():
    assert oracle_components([], are_connected) == []


def test_components_of_complete_graph():
    crowds = list(range(5))
    parts = oracle_components(crowds, lambda a, b: True)
    assert parts == [frozenset({0, 1, 2, 3, 4})]


def test_components_of_edgeless_graph():
    crowds = list(range(4))
    parts = oracle_components(crowds, lambda a, b: False)
    assert parts == [frozenset({i}) for i in range(4)]


def test_components_size_bound():
    with pytest.raises(ValueError, match="too large"):
        oracle_components(list(range(101)), lambda a, b: False)
