"""Stage 3: mobility profiles and unusual-crowd classification.

A mobility profile counts, per user and hour of day, the calls made at each
antenna over the whole history. A crowd is unusual when its committed users'
trajectories look unlike their profiles: the mean cosine similarity between
each user's existence-probability vector and their profile-fraction vector
along the crowd's chain stays below the similarity threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Optional

from .crowds import Crowd
from .ingest import CallIndex
from .model import Call, Params, TimeGrid, PROFILE_PERIOD

PROFILE_FORMAT_VERSION = 1


@dataclass
class ProfileStore:
    """user -> hour of day (0..23) -> antenna -> call count."""

    profiles: dict[str, dict[int, dict[str, int]]] = field(default_factory=dict)

    def counts(self, user_id: str, hour: int) -> dict[str, int]:
        per_hour = self.profiles.get(user_id)
        if not per_hour:
            return {}
        return per_hour.get(hour, {})

    def to_json_bytes(self) -> bytes:
        payload = {
            "version": PROFILE_FORMAT_VERSION,
            "profiles": {
                user: {str(h): antennas for h, antennas in sorted(hours.items())}
                for user, hours in sorted(self.profiles.items())
            },
        }
        return json.dumps(payload, separators=(",", ":")).encode()

    @classmethod
    def from_json_bytes(cls, raw: bytes) -> "ProfileStore":
        payload = json.loads(raw)
        version = payload.get("version")
        if version != PROFILE_FORMAT_VERSION:
            raise ValueError(f"unsupported profile store version: {version}")
        store = cls()
        for user, hours in payload["profiles"].items():
            store.profiles[user] = {int(h): dict(antennas)
                                    for h, antennas in hours.items()}
        return store


def build_profiles(calls: Iterable[Call], grid: TimeGrid) -> ProfileStore:
    """Single pass over the admitted calls; grid fixes the hour convention."""
    store = ProfileStore()
    profiles = store.profiles
    for call in calls:
        hour = (call.at // 3600) % PROFILE_PERIOD
        hours = profiles.get(call.user_id)
        if hours is None:
            hours = profiles[call.user_id] = {}
        antennas = hours.get(hour)
        if antennas is None:
            antennas = hours[hour] = {}
        antennas[call.antenna_id] = antennas.get(call.antenna_id, 0) + 1
    return store


def profile_vector(store: ProfileStore, user_id: str,
                   chain: Iterable[tuple[int, str]], grid: TimeGrid) -> list[float]:
    """Profile-fraction vector along a crowd chain of (grid index, antenna).

    Component i is the share of the user's historical calls during the hour of
    day of t_i that happened at the chain's antenna a_i; 0 when the user has
    no history at that hour.
    """
    out = []
    for t, antenna_id in chain:
        counts = store.counts(user_id, grid.hour_of_day(t))
        total = sum(counts.values())
        out.append(counts.get(antenna_id, 0) / total if total else 0.0)
    return out


def _excluded_profile_vector(user_id: str, chain: list[tuple[int, str]],
                             grid: TimeGrid, index: CallIndex,
                             span: tuple[int, int],
                             hod_windows: dict[int, list[int]]) -> list[float]:
    """Profile fractions built from window observations at the same hour of
    day on other days, skipping the crowd's own span entirely, so the
    trajectory under test does not vouch for itself."""
    out = []
    for t, antenna_id in chain:
        num = 0
        den = 0
        for w in hod_windows.get(grid.hour_of_day(t), ()):
            if span[0] <= w <= span[1]:
                continue
            total = index.user_total(w, user_id)
            if not total:
                continue
            den += total
            num += index.observation_count(w, antenna_id, user_id)
        out.append(num / den if den else 0.0)
    return out


def hour_of_day_windows(grid: TimeGrid) -> dict[int, list[int]]:
    """Grid indices grouped by their hour of day."""
    out: dict[int, list[int]] = {}
    for t in range(grid.n_steps):
        out.setdefault(grid.hour_of_day(t), []).append(t)
    return out


def cosine(w_c: list[float], w_m: list[float]) -> float:
    """Cosine similarity; 0 by convention when either vector has zero norm."""
    if len(w_c) != len(w_m):
        raise ValueError("vector length mismatch")
    if not w_c:
        raise ValueError("empty vectors")
    dot = sum(a * b for a, b in zip(w_c, w_m))
    norm_c = math.sqrt(sum(a * a for a in w_c))
    norm_m = math.sqrt(sum(b * b for b in w_m))
    if norm_c == 0.0 or norm_m == 0.0:
        return 0.0
    return dot / (norm_c * norm_m)


@dataclass(frozen=True)
class UserSimilarity:
    user_id: str
    w_c: list[float]
    w_m: list[float]
    value: float


@dataclass(frozen=True)
class SimilarityReport:
    users: list[UserSimilarity]
    mean: float


def classify_unusual(crowd: Crowd, store: ProfileStore, params: Params,
                     grid: TimeGrid,
                     exclude_index: Optional[CallIndex] = None,
                     hod_windows: Optional[dict[int, list[int]]] = None,
                     ) -> tuple[bool, SimilarityReport]:
    """Def-6 test: unusual iff the committed users' mean similarity is
    strictly below the similarity threshold.

    When exclude_index is given, profile fractions come from same-hour
    windows outside the crowd's span (otherwise the event under test
    inflates its own routine and similarity saturates).
    """
    if not crowd.committed:
        raise ValueError("crowd has an empty committed set")
    chain = [(c.t, c.antenna_id) for c in crowd.chain]
    vectors = crowd.existence_vectors(params.commitment_probability)
    if exclude_index is not None and hod_windows is None:
        hod_windows = hour_of_day_windows(grid)
    users: list[UserSimilarity] = []
    total = 0.0
    for user_id in sorted(crowd.committed):
        w_c = vectors.get(user_id, [0.0] * len(chain))
        if exclude_index is None:
            w_m = profile_vector(store, user_id, chain, grid)
        else:
            w_m = _excluded_profile_vector(user_id, chain, grid, exclude_index,
                                           (crowd.start, crowd.end), hod_windows)
        value = cosine(w_c, w_m)
        users.append(UserSimilarity(user_id, w_c, w_m, value))
        total += value
    mean = total / len(users)
    report = SimilarityReport(users=users, mean=mean)
    return mean < params.similarity, report


def save_profiles(store: ProfileStore, out: BinaryIO) -> None:
    out.write(store.to_json_bytes())


def load_profiles(source: BinaryIO) -> ProfileStore:
    return ProfileStore.from_json_bytes(source.read())
