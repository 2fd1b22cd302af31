import io
import json

import pytest
from hypothesis import settings

from crowdlens import pipeline
from crowdlens.clusters import CylindricalCluster
from crowdlens.model import Params
from crowdlens.synth import SynthConfig, generate

# property tests must behave the same on every run
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


def make_cluster(t, antenna_id, members, observations=None):
    members = frozenset(members)
    return CylindricalCluster(
        t=t, antenna_id=antenna_id, members=members,
        observations=observations or {u: 1 for u in sorted(members)})


@pytest.fixture
def fig2a_db():
    """The worked four-timestamp scenario: three users at one antenna and a
    fourth elsewhere, then a merged group drifting across two more antennas.

    Antenna names follow the profile table (l7 at the second step, l2 at the
    third, l8 at the fourth) so profile fixtures line up."""
    return {
        0: [make_cluster(0, "l3", ["u1", "u2", "u3"]),
            make_cluster(0, "lB", ["u4"])],
        1: [make_cluster(1, "l7", ["u2", "u4"])],
        2: [make_cluster(2, "l2", ["u1", "u2", "u3"])],
        3: [make_cluster(3, "l8", ["u1", "u2"])],
    }


@pytest.fixture
def fig2a_params():
    return Params(scale=1, lifetime=4, commitment=1,
                  commitment_probability=0.2)


@pytest.fixture(scope="session")
def default_city():
    """Fixed-seed default synthetic city plus its parsed dataset and a full
    default-parameter detection run. Session-scoped: several suites share it."""
    config = SynthConfig()
    result = generate(config)
    dataset = pipeline.load_dataset(io.BytesIO(result.calls_csv),
                                    io.BytesIO(result.antennas_csv))
    run = pipeline.run_detection(dataset, Params())
    truth = json.loads(result.ground_truth_json)
    return {"config": config, "result": result, "dataset": dataset,
            "run": run, "truth": truth}


@pytest.fixture(scope="session")
def small_city():
    """A quick city for CLI and server tests."""
    config = SynthConfig(seed=11, n_users=900, n_antennas=20, n_days=4,
                         n_events=1, event_participants=50, n_venues=4)
    result = generate(config)
    return {"config": config, "result": result}
