"""Stage 2: closed crowd mining over the cluster database.

A candidate crowd is a chain of consecutive clusters. Its per-user existence
probability is 1 when the user is observed in the chain's current cluster and
decays by the chain's carry ratio (fraction of the previous cluster's observed
members seen again) per silent step. Users whose probability falls below the
commitment probability are dropped from the candidate for good; users observed
for the first time join with probability 1. A cluster extends a candidate only
when the carry ratio itself reaches the commitment probability and the
committed set stays at least `commitment` strong.

Crowds are candidates that lived at least `lifetime` steps across at least
`min_locations` antennas; closed crowds are the ones not contained in any
longer crowd as a contiguous same-antenna subsequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Optional

from .clusters import ClusterDB, CylindricalCluster
from .model import Params, validate_params


def existence_step(prev_prob: float, carried: int, prev_cluster_size: int,
                   observed_now: bool) -> float:
    """One decay/reset step of a user's existence probability."""
    if prev_cluster_size <= 0:
        raise ValueError("previous cluster is empty")
    if not (0 <= carried <= prev_cluster_size):
        raise ValueError("carried count outside [0, cluster size]")
    if not (0.0 <= prev_prob <= 1.0):
        raise ValueError("probability outside [0, 1]")
    if observed_now:
        return 1.0
    return prev_prob * (carried / prev_cluster_size)


@dataclass(frozen=True)
class ExistenceState:
    """Tracked users' probabilities at the candidate's latest timestamp."""

    probabilities: dict[str, float]
    observed: frozenset[str]          # users directly observed at that step
    dropped: frozenset[str] = frozenset()

    @property
    def committed(self) -> frozenset[str]:
        return frozenset(self.probabilities)


@dataclass(frozen=True)
class ChainCluster:
    t: int
    antenna_id: str
    observed: frozenset[str]


@dataclass(frozen=True)
class CandidateCrowd:
    chain: tuple[ChainCluster, ...]
    existence: ExistenceState

    @property
    def start(self) -> int:
        return self.chain[0].t

    @property
    def end(self) -> int:
        return self.chain[-1].t

    @property
    def lifetime(self) -> int:
        return len(self.chain)

    @property
    def committed(self) -> frozenset[str]:
        return self.existence.committed

    def antenna_sequence(self) -> tuple[str, ...]:
        return tuple(c.antenna_id for c in self.chain)

    @classmethod
    def seed(cls, cluster: CylindricalCluster) -> "CandidateCrowd":
        members = cluster.members
        return cls(
            chain=(ChainCluster(cluster.t, cluster.antenna_id, members),),
            existence=ExistenceState({u: 1.0 for u in members}, members),
        )


@dataclass(frozen=True)
class Crowd:
    """A closed crowd: chain, committed membership and derived attributes."""

    chain: tuple[ChainCluster, ...]
    committed: frozenset[str]

    @property
    def start(self) -> int:
        return self.chain[0].t

    @property
    def end(self) -> int:
        return self.chain[-1].t

    @property
    def lifetime(self) -> int:
        return len(self.chain)

    @property
    def distinct_antennas(self) -> int:
        return len({c.antenna_id for c in self.chain})

    def antenna_sequence(self) -> tuple[str, ...]:
        return tuple(c.antenna_id for c in self.chain)

    def all_observed(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.chain:
            out |= c.observed
        return frozenset(out)

    def existence_vectors(self, eps_p: float) -> dict[str, list[float]]:
        """Per committed user, the probability at every chain position
        (0.0 before the user first appears)."""
        _, history, _ = replay_chain([c.observed for c in self.chain], eps_p)
        return {u: history[u] for u in sorted(self.committed) if u in history}

    def contains(self, other: "Crowd") -> bool:
        """True when `other` is a contiguous subsequence of this crowd:
        same antenna at the same grid index over other's whole span."""
        if other.start < self.start or other.end > self.end:
            return False
        offset = other.start - self.start
        mine = self.chain
        return all(mine[offset + i].antenna_id == c.antenna_id
                   for i, c in enumerate(other.chain))


def replay_chain(observed_seq: list[frozenset[str]],
                 eps_p: float) -> tuple[dict[str, float], dict[str, list[float]], list[float]]:
    """Walk existence probabilities along a cluster chain from its start.

    Returns (final probabilities, per-user probability history, carry ratios).
    Dropped users vanish from both maps; rejoin is not allowed within a chain.
    """
    first = observed_seq[0]
    probs = {u: 1.0 for u in first}
    history: dict[str, list[float]] = {u: [1.0] for u in first}
    dropped: set[str] = set()
    ratios: list[float] = []
    for i in range(1, len(observed_seq)):
        prev_obs, obs = observed_seq[i - 1], observed_seq[i]
        ratio = len(prev_obs & obs) / len(prev_obs)
        ratios.append(ratio)
        gone = []
        for u, p in probs.items():
            if u in obs:
                probs[u] = 1.0
                history[u].append(1.0)
            else:
                p *= ratio
                if p < eps_p:
                    gone.append(u)
                else:
                    probs[u] = p
                    history[u].append(p)
        for u in gone:
            del probs[u]
            del history[u]
            dropped.add(u)
        for u in obs:
            if u not in probs and u not in dropped:
                probs[u] = 1.0
                history[u] = [0.0] * i + [1.0]
    return probs, history, ratios


def _extend_state(state: ExistenceState, prev_obs: frozenset[str],
                  obs: frozenset[str], ratio: float, eps_p: float) -> ExistenceState:
    """One extension step of a candidate's existence state."""
    probs: dict[str, float] = {}
    gone: list[str] | None = None
    for u, p in state.probabilities.items():
        if u in obs:
            probs[u] = 1.0
        else:
            p *= ratio
            if p < eps_p:
                if gone is None:
                    gone = []
                gone.append(u)
            else:
                probs[u] = p
    dropped = state.dropped if gone is None else state.dropped | frozenset(gone)
    for u in obs:
        if u not in probs and u not in dropped:
            probs[u] = 1.0
    return ExistenceState(probs, obs, dropped)


def candidate_cluster_search(candidate: CandidateCrowd,
                             clusters: Iterable[CylindricalCluster],
                             params: Params) -> list[CandidateCrowd]:
    """Admissible one-step extensions of a candidate by clusters at the next
    grid index, with fully materialized existence states.

    A cluster is admissible when the carry ratio from the candidate's last
    observed member set reaches the commitment probability and the committed
    set of the extended candidate still has at least `commitment` users.
    """
    last = candidate.chain[-1]
    prev_obs = last.observed
    eps_p = params.commitment_probability
    out = []
    for cluster in clusters:
        if cluster.t != last.t + 1:
            raise ValueError("extension cluster must sit at the next grid index")
        ratio = len(prev_obs & cluster.members) / len(prev_obs)
        if ratio < eps_p:
            continue
        state = _extend_state(candidate.existence, prev_obs, cluster.members,
                              ratio, eps_p)
        if len(state.probabilities) < params.commitment:
            continue
        out.append(CandidateCrowd(
            chain=candidate.chain + (ChainCluster(cluster.t, cluster.antenna_id,
                                                  cluster.members),),
            existence=state,
        ))
    return out


def is_closed(candidate: Crowd, crowds_ending_at_same_t: Iterable[Crowd]) -> bool:
    """True iff the candidate is not a contiguous subsequence of (or identical
    to) any crowd in the list. Callers pass the crowds ending at candidate.end;
    crowds ending elsewhere cannot contain a chain that ends here."""
    return not any(other.contains(candidate) for other in crowds_ending_at_same_t)


@dataclass
class _LiveCandidate:
    chain: tuple[ChainCluster, ...]
    antennas: frozenset[str]
    state: ExistenceState


def mine_closed_crowds(db: ClusterDB, params: Params) -> list[Crowd]:
    """All closed crowds in the cluster database."""
    crowds, _ = mine_closed_crowds_with_stats(db, params)
    return crowds


def mine_closed_crowds_with_stats(db: ClusterDB,
                                  params: Params) -> tuple[list[Crowd], dict[int, int]]:
    """Closed crowds plus the live candidate-chain count per timestamp.

    Sweeps timestamps in increasing order, extending candidate chains by the
    admissibility rule, seeding every cluster as a fresh candidate, and
    collecting dead candidates that satisfy durability and movement. Closedness
    is settled at the end by discarding any crowd contained in another: with
    permanent drops a chain and its suffixes need not die together, so the
    containment check is global rather than per ending timestamp.
    """
    problems = validate_params(params)
    if problems:
        raise ValueError("invalid params: " + "; ".join(problems))
    eps_p = params.commitment_probability
    eps_ci = params.commitment

    timestamps = sorted(db)
    if not timestamps:
        return [], {}
    t_lo, t_hi = timestamps[0], timestamps[-1]

    live: list[_LiveCandidate] = []
    pool: list[Crowd] = []
    candidate_counts: dict[int, int] = {}

    def retire(cand: _LiveCandidate) -> None:
        if len(cand.chain) >= params.lifetime and len(cand.antennas) >= params.min_locations:
            pool.append(Crowd(chain=cand.chain, committed=cand.state.committed))

    for t in range(t_lo, t_hi + 2):
        clusters = [c for c in db.get(t, []) if len(c.members) >= params.scale]
        survivors: list[_LiveCandidate] = []
        if clusters and live:
            # Carry ratios depend only on the (previous, next) cluster pair;
            # compute them once per pair instead of per candidate.
            member_sets = [c.members for c in clusters]
            ratio_cache: dict[tuple[str, int], float] = {}
            for cand in live:
                last = cand.chain[-1]
                prev_obs = last.observed
                extended = False
                for idx, cluster in enumerate(clusters):
                    key = (last.antenna_id, idx)
                    ratio = ratio_cache.get(key)
                    if ratio is None:
                        ratio = len(prev_obs & member_sets[idx]) / len(prev_obs)
                        ratio_cache[key] = ratio
                    if ratio < eps_p:
                        continue
                    state = _extend_state(cand.state, prev_obs, member_sets[idx],
                                          ratio, eps_p)
                    if len(state.probabilities) < eps_ci:
                        continue
                    survivors.append(_LiveCandidate(
                        chain=cand.chain + (ChainCluster(t, cluster.antenna_id,
                                                         member_sets[idx]),),
                        antennas=cand.antennas | {cluster.antenna_id},
                        state=state,
                    ))
                    extended = True
                if not extended:
                    retire(cand)
        else:
            for cand in live:
                retire(cand)

        for cluster in clusters:
            survivors.append(_LiveCandidate(
                chain=(ChainCluster(t, cluster.antenna_id, cluster.members),),
                antennas=frozenset((cluster.antenna_id,)),
                state=ExistenceState({u: 1.0 for u in cluster.members},
                                     cluster.members),
            ))
        live = survivors
        if t <= t_hi:
            candidate_counts[t] = len(live)

    pool.sort(key=lambda c: (c.start, c.antenna_sequence()))
    closed = [c for c in pool
              if not any(o is not c and o.contains(c) for o in pool)]
    return closed, candidate_counts


def dump_crowds(crowds: Iterable[Crowd], out: BinaryIO) -> None:
    for crowd in crowds:
        out.write(json.dumps(crowd_to_dict(crowd), separators=(",", ":")).encode())
        out.write(b"\n")


def crowd_to_dict(crowd: Crowd) -> dict:
    return {
        "start": crowd.start,
        "end": crowd.end,
        "chain": [{"t": c.t, "antenna_id": c.antenna_id,
                   "observed": sorted(c.observed)} for c in crowd.chain],
        "committed": sorted(crowd.committed),
        "lifetime": crowd.lifetime,
        "distinct_antennas": crowd.distinct_antennas,
    }


def crowd_from_dict(obj: dict) -> Crowd:
    chain = tuple(ChainCluster(c["t"], c["antenna_id"], frozenset(c["observed"]))
                  for c in obj["chain"])
    return Crowd(chain=chain, committed=frozenset(obj["committed"]))
