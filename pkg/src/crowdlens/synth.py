"""Synthetic CDR generator with planted unusual events.

Routine mobility is two anchor antennas per user: home overnight (19:00-08:59)
and work during the day (09:00-18:59), with rare excursions to random
antennas. Antenna populations follow a power law and the per-hour call chance
follows a double-peaked commute curve, so cluster counts rise and fall the way
city traffic does. A handful of venue antennas host nobody's routine; planted
events move their participants onto short chains across venues, which keeps
the participants' profile mass at the chain near zero by construction.

Output is deterministic per seed, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Optional

import numpy as np

GENESIS = 1325462400      # 2012-01-02T00:00:00Z, a Monday
DEFAULT_EVENT_START_HOUR = 10

# Per hour-of-day multiplier on the base call probability: quiet nights,
# morning and evening commute peaks, a midday plateau.
DEFAULT_ACTIVITY = (
    0.17, 0.17, 0.17, 0.17, 0.17, 0.17,   # 00-05
    0.50, 0.90, 1.28, 1.30, 1.10, 1.00,   # 06-11
    1.00, 1.00, 1.00, 1.05, 1.10, 1.20,   # 12-17
    1.30, 1.20, 0.90, 0.70, 0.45, 0.17,   # 18-23
)


@dataclass(frozen=True)
class PlantedEvent:
    participants: tuple[str, ...]
    chain: tuple[tuple[int, str], ...]    # (grid index, antenna_id) per hour
    call_probability: float = 0.85


@dataclass
class SynthConfig:
    seed: int = 42
    n_users: int = 5000
    n_antennas: int = 50
    n_days: int = 14
    n_events: int = 3
    call_probability: float = 0.7         # base per user-hour call chance
    hourly_activity: tuple[float, ...] = DEFAULT_ACTIVITY
    population_exponent: float = 1.1      # antenna popularity ~ rank^-exponent
    event_call_probability: float = 0.85
    event_participants: int = 80
    event_duration_hours: int = 4
    excursion_probability: float = 0.02
    n_venues: int = 6
    leak_bound: float = 0.2
    start_epoch: int = GENESIS
    max_rows: Optional[int] = None
    events: Optional[list[PlantedEvent]] = None   # explicit plants override

    def user_ids(self) -> list[str]:
        return [f"u{i:05d}" for i in range(self.n_users)]

    def antenna_ids(self) -> list[str]:
        return [f"a{i:03d}" for i in range(self.n_antennas)]


@dataclass
class SynthResult:
    calls_csv: bytes
    antennas_csv: bytes
    ground_truth_json: bytes
    rows_written: int
    events: list[PlantedEvent]


def _antenna_positions(config: SynthConfig, rng: np.random.Generator) -> list[tuple[float, float]]:
    cols = int(np.ceil(np.sqrt(config.n_antennas)))
    base_lon, base_lat, spacing = -4.05, 5.30, 0.012
    jitter = rng.uniform(-0.002, 0.002, size=(config.n_antennas, 2))
    out = []
    for i in range(config.n_antennas):
        r, c = divmod(i, cols)
        out.append((base_lon + c * spacing + float(jitter[i, 0]),
                    base_lat + r * spacing + float(jitter[i, 1])))
    return out


def _plant_events(config: SynthConfig, rng: np.random.Generator) -> list[PlantedEvent]:
    if config.events is not None:
        antennas = set(config.antenna_ids())
        for ev in config.events:
            for _, antenna_id in ev.chain:
                if antenna_id not in antennas:
                    raise ValueError(f"event chain references unknown antenna: {antenna_id}")
        return list(config.events)
    if config.n_events == 0:
        return []
    if config.n_events * config.event_participants > config.n_users:
        raise ValueError("not enough users for the requested planted events")
    if config.n_venues < 2:
        raise ValueError("need at least 2 venue antennas to plant moving events")
    antenna_ids = config.antenna_ids()
    user_ids = config.user_ids()
    perm = rng.permutation(config.n_users)
    events = []
    for i in range(config.n_events):
        day = (i + 1) * config.n_days // (config.n_events + 1)
        day = min(day, config.n_days - 1)
        start = day * 24 + DEFAULT_EVENT_START_HOUR
        duration = config.event_duration_hours
        first_venue = antenna_ids[(2 * i) % config.n_venues]
        second_venue = antenna_ids[(2 * i + 1) % config.n_venues]
        half = duration // 2
        chain = tuple((start + k, first_venue if k < half else second_venue)
                      for k in range(duration))
        chosen = perm[i * config.event_participants:(i + 1) * config.event_participants]
        participants = tuple(user_ids[j] for j in sorted(chosen))
        events.append(PlantedEvent(participants=participants, chain=chain,
                                   call_probability=config.event_call_probability))
    return events


def _anchor_antennas(config: SynthConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Skewed home/work assignment over the non-venue antennas."""
    n_routine = config.n_antennas - config.n_venues
    if n_routine < 2:
        raise ValueError("need at least 2 non-venue antennas")
    weights = np.arange(1, n_routine + 1, dtype=float) ** -config.population_exponent
    weights /= weights.sum()
    home = rng.choice(n_routine, size=config.n_users, p=weights)
    work = rng.choice(n_routine, size=config.n_users, p=weights)
    clash = work == home
    while clash.any():
        work[clash] = rng.choice(n_routine, size=int(clash.sum()), p=weights)
        clash = work == home
    return home + config.n_venues, work + config.n_venues


def generate(config: SynthConfig) -> SynthResult:
    """Produce (calls.csv, antennas.csv, ground_truth.json) as bytes."""
    if len(config.hourly_activity) != 24:
        raise ValueError("hourly_activity must have 24 entries")
    rng = np.random.default_rng(config.seed)
    antenna_ids = config.antenna_ids()
    user_ids = config.user_ids()
    positions = _antenna_positions(config, rng)

    antenna_lines = ["antenna_id,longitude,latitude"]
    antenna_lines += [f"{aid},{lon:.6f},{lat:.6f}"
                      for aid, (lon, lat) in zip(antenna_ids, positions)]
    antennas_csv = ("\n".join(antenna_lines) + "\n").encode()

    home, work = _anchor_antennas(config, rng)
    events = _plant_events(config, rng)

    antenna_index = {aid: i for i, aid in enumerate(antenna_ids)}
    user_index = {uid: i for i, uid in enumerate(user_ids)}
    overrides: dict[int, list[tuple[np.ndarray, int, float]]] = {}
    for ev in events:
        idx = np.array(sorted(user_index[u] for u in ev.participants), dtype=np.int64)
        for h, antenna_id in ev.chain:
            overrides.setdefault(h, []).append(
                (idx, antenna_index[antenna_id], ev.call_probability))

    hour_probability = np.clip(
        config.call_probability * np.asarray(config.hourly_activity), 0.0, 1.0)

    n_hours = config.n_days * 24
    rows: list[str] = []
    rows_written = 0
    cap = config.max_rows if config.max_rows is not None else -1
    antenna_arr = np.array(antenna_ids)
    user_arr = np.array(user_ids)
    done = False

    for h in range(n_hours):
        if done:
            break
        hod = h % 24
        location = np.where((hod >= 9) & (hod <= 18), work, home)
        call_p = np.full(config.n_users, hour_probability[hod])
        excursion = rng.random(config.n_users) < config.excursion_probability
        n_exc = int(excursion.sum())
        if n_exc:
            location[excursion] = rng.integers(0, config.n_antennas, size=n_exc)
        hour_overrides = overrides.get(h, [])
        for idx, antenna, prob in hour_overrides:
            location[idx] = antenna
            call_p[idx] = prob
        calling = np.nonzero(rng.random(config.n_users) < call_p)[0]
        seconds = rng.integers(0, 3600, size=calling.size)
        base = config.start_epoch + h * 3600
        prefix = _iso_hour_prefix(base)
        for u, sec in zip(calling, seconds):
            mm, ss = divmod(int(sec), 60)
            rows.append(f"{user_arr[u]},{prefix}:{mm:02d}:{ss:02d}Z,{antenna_arr[location[u]]}")
            rows_written += 1
            if rows_written == cap:
                done = True
                break
        if done:
            break
        # People at an event chat more than their hourly routine: one extra
        # call attempt per participant keeps the cluster windows connected.
        for idx, antenna, prob in hour_overrides:
            extra = idx[rng.random(idx.size) < prob]
            extra_seconds = rng.integers(0, 3600, size=extra.size)
            for u, sec in zip(extra, extra_seconds):
                mm, ss = divmod(int(sec), 60)
                rows.append(f"{user_arr[u]},{prefix}:{mm:02d}:{ss:02d}Z,{antenna_arr[antenna]}")
                rows_written += 1
                if rows_written == cap:
                    done = True
                    break
            if done:
                break

    calls_csv = ("user_id,timestamp,antenna_id\n" + "\n".join(rows) + "\n").encode() \
        if rows else b"user_id,timestamp,antenna_id\n"

    truth = {
        "origin_epoch": config.start_epoch,
        "events": [
            {
                "event_id": f"gt-{i:04d}",
                "start": ev.chain[0][0],
                "end": ev.chain[-1][0],
                "antenna_ids": sorted({a for _, a in ev.chain}),
                "participants": sorted(ev.participants),
            }
            for i, ev in enumerate(events, start=1)
        ],
    }
    ground_truth_json = json.dumps(truth, indent=1, sort_keys=True).encode()
    return SynthResult(calls_csv=calls_csv, antennas_csv=antennas_csv,
                       ground_truth_json=ground_truth_json,
                       rows_written=rows_written, events=events)


def _iso_hour_prefix(epoch_hour_start: int) -> str:
    days, rem = divmod(epoch_hour_start, 86400)
    hour = rem // 3600
    d = date(1970, 1, 1) + timedelta(days=days)
    return f"{d.year:04d}-{d.month:02d}-{d.day:02d}T{hour:02d}"
