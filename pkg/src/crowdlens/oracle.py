"""Brute-force reference implementations for the mining and event stages.

These trade speed for directness: every contiguous cluster chain is checked
against the crowd definition by replaying it from scratch, and components come
from a plain BFS over the explicit adjacency matrix. They exist to pin down
the fast implementations on small instances and are exponential by design.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from .clusters import ClusterDB, CylindricalCluster
from .crowds import ChainCluster, Crowd
from .model import Params, validate_params

MAX_ANTENNAS = 5
MAX_TIMESTAMPS = 10
MAX_USERS = 15


def _check_instance_size(db: ClusterDB) -> None:
    antennas = {c.antenna_id for cs in db.values() for c in cs}
    users = {u for cs in db.values() for c in cs for u in c.members}
    if len(db) > MAX_TIMESTAMPS or len(antennas) > MAX_ANTENNAS or len(users) > MAX_USERS:
        raise ValueError("instance too large for the exhaustive oracle")


def _chain_committed(chain: Sequence[CylindricalCluster],
                     params: Params) -> Optional[frozenset[str]]:
    """Committed users of a chain, or None when any step breaks the crowd
    definition. Walks the definitions directly: carry ratio per consecutive
    pair must reach the commitment probability, tracked users decay and drop
    for good below it, and the committed set must stay large enough after
    every cluster."""
    eps_p = params.commitment_probability
    probs = {u: 1.0 for u in chain[0].members}
    dropped: set[str] = set()
    if len(probs) < params.commitment:
        return None
    for prev, cur in zip(chain, chain[1:]):
        carried = len(prev.members & cur.members)
        ratio = carried / len(prev.members)
        if ratio < eps_p:
            return None
        nxt: dict[str, float] = {}
        for u, p in probs.items():
            if u in cur.members:
                nxt[u] = 1.0
            else:
                decayed = p * ratio
                if decayed < eps_p:
                    dropped.add(u)
                else:
                    nxt[u] = decayed
        for u in cur.members:
            if u not in nxt and u not in dropped:
                nxt[u] = 1.0
        if len(nxt) < params.commitment:
            return None
        probs = nxt
    return frozenset(probs)


def oracle_mine(db: ClusterDB, params: Params) -> list[Crowd]:
    """Exhaustive closed-crowd mining on a small instance.

    Enumerates every contiguous chain (one cluster per consecutive timestamp),
    keeps the ones that satisfy scale, commitment, durability and movement,
    and removes chains contained in a longer qualifying chain.
    """
    problems = validate_params(params)
    if problems:
        raise ValueError("invalid params: " + "; ".join(problems))
    _check_instance_size(db)

    by_t = {t: [c for c in cs if len(c.members) >= params.scale]
            for t, cs in db.items()}
    timestamps = sorted(t for t, cs in by_t.items() if cs)

    valid: list[tuple[tuple[CylindricalCluster, ...], frozenset[str]]] = []

    def extend(chain: tuple[CylindricalCluster, ...]) -> None:
        committed = _chain_committed(chain, params)
        if committed is None:
            return
        valid.append((chain, committed))
        for nxt in by_t.get(chain[-1].t + 1, []):
            extend(chain + (nxt,))

    for t in timestamps:
        for cluster in by_t[t]:
            extend((cluster,))

    crowds = []
    for chain, committed in valid:
        if len(chain) < params.lifetime:
            continue
        if len({c.antenna_id for c in chain}) < params.min_locations:
            continue
        crowds.append(Crowd(
            chain=tuple(ChainCluster(c.t, c.antenna_id, c.members) for c in chain),
            committed=committed,
        ))

    closed = [c for c in crowds
              if not any(o is not c and o.contains(c) for o in crowds)]
    closed.sort(key=lambda c: (c.start, c.antenna_sequence()))
    return closed


def oracle_components(crowds: Sequence, connected: Callable) -> list[frozenset[int]]:
    """Connected components as index sets, via BFS on the adjacency matrix."""
    if len(crowds) > 100:
        raise ValueError("instance too large for the oracle")
    n = len(crowds)
    adj = [[i != j and connected(crowds[i], crowds[j]) for j in range(n)]
           for i in range(n)]
    seen = [False] * n
    out = []
    for i in range(n):
        if seen[i]:
            continue
        queue = [i]
        seen[i] = True
        component = set()
        while queue:
            k = queue.pop(0)
            component.add(k)
            for j in range(n):
                if adj[k][j] and not seen[j]:
                    seen[j] = True
                    queue.append(j)
        out.append(frozenset(component))
    return out
