"""Command-line front end: synth, detect, profile-build, eval, serve.

Every flag also reads from a CROWDLENS_<FLAG> environment variable; explicit
flags win over the environment, which wins over defaults. Exit codes: 0
success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline
from .evaluate import EventRecord, detected_records, score, truth_records
from .model import Params, validate_params
from .profiles import save_profiles
from .synth import SynthConfig, generate


def _params_from_options(epsilon_n, epsilon_lt, epsilon_ci, epsilon_p,
                         epsilon_si, min_locations, window_minutes) -> Params:
    params = Params(scale=epsilon_n, lifetime=epsilon_lt, commitment=epsilon_ci,
                    commitment_probability=epsilon_p, similarity=epsilon_si,
                    min_locations=min_locations,
                    half_window=window_minutes * 60)
    problems = validate_params(params)
    if problems:
        raise click.UsageError("; ".join(problems))
    return params


def _param_options(fn):
    decorators = [
        click.option("--epsilon-n", type=int, default=20, show_default=True,
                     envvar="CROWDLENS_EPSILON_N", help="Cluster scale threshold."),
        click.option("--epsilon-lt", type=int, default=4, show_default=True,
                     envvar="CROWDLENS_EPSILON_LT", help="Crowd lifetime threshold."),
        click.option("--epsilon-ci", type=int, default=10, show_default=True,
                     envvar="CROWDLENS_EPSILON_CI", help="Committed-user threshold."),
        click.option("--epsilon-p", type=float, default=0.2, show_default=True,
                     envvar="CROWDLENS_EPSILON_P", help="Commitment probability."),
        click.option("--epsilon-si", type=float, default=0.2, show_default=True,
                     envvar="CROWDLENS_EPSILON_SI", help="Similarity threshold."),
        click.option("--min-locations", type=int, default=2, show_default=True,
                     envvar="CROWDLENS_MIN_LOCATIONS", help="Distinct antennas per crowd."),
        click.option("--window-minutes", type=int, default=30, show_default=True,
                     envvar="CROWDLENS_WINDOW_MINUTES", help="Cluster half-window in minutes."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


@click.group()
def main():
    """Unusual crowd event detection from call detail records."""


@main.command()
@click.option("--calls", required=True, envvar="CROWDLENS_CALLS",
              help="Path to calls.csv.")
@click.option("--antennas", required=True, envvar="CROWDLENS_ANTENNAS",
              help="Path to antennas.csv.")
@click.option("--out", required=True, envvar="CROWDLENS_OUT",
              help="Output directory for run artifacts.")
@click.option("--pois", default=None, envvar="CROWDLENS_POIS",
              help="Optional pois.csv enriching event pop-ups.")
@click.option("--workers", type=int, default=1, envvar="CROWDLENS_WORKERS",
              help="Worker threads for per-timestamp clustering.")
@_param_options
def detect(calls, antennas, out, pois, workers, epsilon_n, epsilon_lt,
           epsilon_ci, epsilon_p, epsilon_si, min_locations, window_minutes):
    """Run the full detection pipeline and write artifacts."""
    params = _params_from_options(epsilon_n, epsilon_lt, epsilon_ci, epsilon_p,
                                  epsilon_si, min_locations, window_minutes)
    try:
        dataset = pipeline.load_dataset_from_paths(
            calls, antennas, half_window=params.half_window, pois_path=pois)
    except OSError as exc:
        raise click.ClickException(f"cannot read input: {exc}")
    except ValueError as exc:
        raise click.ClickException(str(exc))

    run = pipeline.run_detection(dataset, params, workers=workers)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "events.json").write_bytes(
        pipeline.render_json(pipeline.events_payload(run, dataset)))
    with open(out_dir / "crowds.jsonl", "wb") as fh:
        from .crowds import dump_crowds
        dump_crowds(run.crowds, fh)
    (out_dir / "timeseries.csv").write_bytes(run.series.to_csv_bytes())
    (out_dir / "timeseries.json").write_bytes(
        pipeline.render_json(pipeline.timeseries_payload(run)))
    (out_dir / "analyst_stats.json").write_bytes(
        pipeline.render_json(run.stats.to_dict()))
    (out_dir / "ingest_report.json").write_text(dataset.report.to_json())

    counts = pipeline.summary_counts(run)
    click.echo(f"admitted calls: {dataset.report.admitted}")
    for name in ("clusters", "crowds", "unusual_crowds", "unusual_events"):
        click.echo(f"{name}: {counts[name]}")
    click.echo(f"artifacts written to {out_dir}")


@main.command()
@click.option("--seed", type=int, default=42, show_default=True,
              envvar="CROWDLENS_SEED")
@click.option("--users", type=int, default=5000, show_default=True,
              envvar="CROWDLENS_USERS")
@click.option("--antennas-count", type=int, default=50, show_default=True,
              envvar="CROWDLENS_ANTENNAS_COUNT")
@click.option("--days", type=int, default=14, show_default=True,
              envvar="CROWDLENS_DAYS")
@click.option("--events", type=int, default=3, show_default=True,
              envvar="CROWDLENS_EVENTS")
@click.option("--participants", type=int, default=80, show_default=True,
              envvar="CROWDLENS_PARTICIPANTS")
@click.option("--max-rows", type=int, default=None,
              envvar="CROWDLENS_MAX_ROWS", help="Stop after writing N call rows.")
@click.option("--out", required=True, envvar="CROWDLENS_OUT",
              help="Output directory for the generated files.")
def synth(seed, users, antennas_count, days, events, participants, max_rows, out):
    """Generate a synthetic city with planted ground-truth events."""
    config = SynthConfig(seed=seed, n_users=users, n_antennas=antennas_count,
                         n_days=days, n_events=events,
                         event_participants=participants, max_rows=max_rows)
    try:
        result = generate(config)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "calls.csv").write_bytes(result.calls_csv)
    (out_dir / "antennas.csv").write_bytes(result.antennas_csv)
    (out_dir / "ground_truth.json").write_bytes(result.ground_truth_json)
    click.echo(f"rows written: {result.rows_written}")
    click.echo(f"planted events: {len(result.events)}")
    click.echo(f"files written to {out_dir}")


@main.command(name="eval")
@click.option("--detected", required=True, envvar="CROWDLENS_DETECTED",
              help="events.json from a detection run.")
@click.option("--truth", required=True, envvar="CROWDLENS_TRUTH",
              help="ground_truth.json from the generator.")
@click.option("--out", default=None, envvar="CROWDLENS_OUT",
              help="Optional path for the result JSON.")
def eval_cmd(detected, truth, out):
    """Score detected events against planted ground truth."""
    try:
        detected_payload = json.loads(Path(detected).read_text())
        truth_payload = json.loads(Path(truth).read_text())
    except OSError as exc:
        raise click.ClickException(f"cannot read input: {exc}")
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"bad JSON: {exc}")

    origin = detected_payload.get("origin_epoch")
    step = detected_payload.get("step", 3600)
    detected_events = [
        EventRecord(start=ev["start"], end=ev["end"],
                    participants=frozenset(ev["participants"]),
                    origin_epoch=origin, step=step)
        for ev in detected_payload["events"]
    ]
    result = score(detected_events, truth_records(truth_payload))
    precision = "n/a" if result.precision is None else f"{result.precision:.4f}"
    recall = "n/a" if result.recall is None else f"{result.recall:.4f}"
    click.echo(f"matched {result.matched_truth}/{result.truth} truth events")
    click.echo(f"precision {precision}")
    click.echo(f"recall {recall}")
    if out:
        Path(out).write_text(json.dumps(result.to_dict(), indent=1, sort_keys=True))


@main.command(name="profile-build")
@click.option("--calls", required=True, envvar="CROWDLENS_CALLS")
@click.option("--antennas", required=True, envvar="CROWDLENS_ANTENNAS")
@click.option("--out", required=True, envvar="CROWDLENS_OUT",
              help="Path for the profile store JSON.")
def profile_build(calls, antennas, out):
    """Build and serialize the mobility profile store."""
    try:
        dataset = pipeline.load_dataset_from_paths(calls, antennas)
    except OSError as exc:
        raise click.ClickException(f"cannot read input: {exc}")
    except ValueError as exc:
        raise click.ClickException(str(exc))
    with open(out, "wb") as fh:
        save_profiles(dataset.profiles, fh)
    click.echo(f"profiles for {len(dataset.profiles.profiles)} users written to {out}")


@main.command()
@click.option("--data", default=None, envvar="CROWDLENS_DATA",
              help="Directory holding calls.csv, antennas.csv and optional pois.csv.")
@click.option("--calls", default=None, envvar="CROWDLENS_CALLS")
@click.option("--antennas", default=None, envvar="CROWDLENS_ANTENNAS")
@click.option("--pois", default=None, envvar="CROWDLENS_POIS")
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="CROWDLENS_HOST")
@click.option("--port", type=int, default=8080, show_default=True,
              envvar="CROWDLENS_PORT")
@click.option("--ui-assets", default=None, envvar="CROWDLENS_UI_ASSETS",
              help="Directory of static UI files to serve at /ui.")
@click.option("--no-ui-assets", is_flag=True, default=False,
              envvar="CROWDLENS_NO_UI_ASSETS", help="Serve the API only.")
@_param_options
def serve(data, calls, antennas, pois, host, port, ui_assets, no_ui_assets,
          epsilon_n, epsilon_lt, epsilon_ci, epsilon_p, epsilon_si,
          min_locations, window_minutes):
    """Serve detection runs and statistics over HTTP."""
    import errno

    import uvicorn

    from .server import create_app

    params = _params_from_options(epsilon_n, epsilon_lt, epsilon_ci, epsilon_p,
                                  epsilon_si, min_locations, window_minutes)
    if data:
        base = Path(data)
        calls = calls or str(base / "calls.csv")
        antennas = antennas or str(base / "antennas.csv")
        if pois is None and (base / "pois.csv").exists():
            pois = str(base / "pois.csv")
    dataset = None
    if calls and antennas:
        try:
            dataset = pipeline.load_dataset_from_paths(
                calls, antennas, half_window=params.half_window, pois_path=pois)
        except OSError as exc:
            raise click.ClickException(f"cannot read input: {exc}")
        except ValueError as exc:
            raise click.ClickException(str(exc))

    assets = None if no_ui_assets else ui_assets
    app = create_app(dataset=dataset, default_params=params, ui_assets=assets)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except SystemExit as exc:          # uvicorn exits 1 on bind failure
        raise click.ClickException(f"server failed to start (exit {exc.code})")
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise click.ClickException(f"port {port} is already in use")
        raise click.ClickException(str(exc))


if __name__ == "__main__":
    main()
