"""Command-line face of the mission pipeline, one subcommand per API call.

    nelv --catalog uc3 --data-dir /tmp/missions new
    nelv ... say <id> "Fly from Relay Alpha to Relay Lima."
    nelv ... plan-route <id> [--preference cheapest]
    nelv ... plan-path <id> [--label fastest]
    nelv ... build-traj <id>
    nelv ... upload <id>
    nelv ... export <id> [-o mission.txt]

The catalog is a bundled fixture name (us, uc1, uc2, uc3) or a manifest
path; sessions are JSON files under the data directory. The global
--seed feeds the path optimizer, so identical scripts write identical
mission files.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import llm as llm_module
from .errors import NelvError
from .mission_io import export_mission, load_session, save_session
from .pipeline import StageOptions, add_instruction, new_session, run_stage
from .service import resolve_catalog


class CliState:
    """Lazy catalog plus the flags shared by every subcommand."""

    def __init__(self, catalog_source: str, data_dir: Path | None, seed: int | None):
        self.catalog_source = catalog_source
        self.data_dir = data_dir
        self.seed = seed
        self._catalog = None

    @property
    def catalog(self):
        if self._catalog is None:
            self._catalog = resolve_catalog(self.catalog_source)
        return self._catalog


def _fail_on_nelv_error(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NelvError as exc:
            raise click.ClickException(str(exc)) from exc

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
@click.option(
    "--data-dir",
    envvar="NELV_DATA_DIR",
    type=click.Path(path_type=Path, file_okay=False),
    default=None,
    help="Session store directory (default: ~/.nelv).",
)
@click.option(
    "--catalog",
    envvar="NELV_CATALOG",
    default="us",
    show_default=True,
    help="Bundled fixture name or catalog manifest path.",
)
@click.option("--seed", type=int, default=None, help="Path-optimizer seed.")
@click.pass_context
def main(ctx, data_dir, catalog, seed):
    """Plan UAV missions from written instructions, stage by stage."""
    ctx.obj = CliState(catalog, data_dir, seed)


def _spec_lines(record) -> list[str]:
    spec = record.spec
    lines = [f"stage: {record.stage}"]
    lines.append(f"start: {spec.start_id or '?'}  end: {spec.end_id or '?'}")
    lines.append(f"preference: {spec.preference}  fleet: {spec.fleet_size}")
    if spec.visit_categories:
        lines.append("visit: " + ", ".join(spec.visit_categories))
    if spec.is_survey:
        radius = f" within {spec.survey_radius_m:.0f} m" if spec.survey_radius_m else ""
        lines.append(f"survey: {spec.survey_category} around {spec.survey_center_id or '?'}{radius}")
    if spec.max_duration_s:
        lines.append(f"duration limit: {spec.max_duration_s:.0f} s")
    return lines


@main.command()
@click.pass_obj
@_fail_on_nelv_error
def new(state: CliState):
    """Create a session and print its id."""
    record = new_session()
    save_session(record, state.data_dir)
    click.echo(record.session_id)


@main.command()
@click.argument("session_id")
@click.argument("text")
@click.pass_obj
@_fail_on_nelv_error
def say(state: CliState, session_id: str, text: str):
    """Add one instruction and show the re-parsed mission."""
    record = load_session(session_id, state.data_dir)
    record, result = add_instruction(record, text, state.catalog, llm_module.from_env())
    save_session(record, state.data_dir)
    for line in _spec_lines(record):
        click.echo(line)
    for prompt in result.missing:
        click.echo(f"? {prompt}")


@main.command("plan-route")
@click.argument("session_id")
@click.option("--preference", default=None, help="Select this alternative instead of the spoken one.")
@click.pass_obj
@_fail_on_nelv_error
def plan_route(state: CliState, session_id: str, preference: str | None):
    """Run the route stage and list the labeled alternatives."""
    record = load_session(session_id, state.data_dir)
    record = run_stage(record, "route", state.catalog, StageOptions(preference=preference))
    save_session(record, state.data_dir)
    click.echo(f"graph: {record.graph_summary}")
    for route in record.alternatives:
        marker = "*" if route is record.route else " "
        labels = ",".join((route.label, *route.also_labels))
        cost = "-" if route.total_fuel_cost is None else f"{route.total_fuel_cost:.2f}"
        click.echo(
            f"{marker} {labels:<28} {'>'.join(route.node_ids)}  "
            f"{route.total_distance_m / 1000.0:.1f} km  fuel {route.total_fuel_l:.1f} l  cost {cost}"
        )


@main.command("plan-path")
@click.argument("session_id")
@click.option("--label", default=None, help="Path this route alternative.")
@click.pass_obj
@_fail_on_nelv_error
def plan_path(state: CliState, session_id: str, label: str | None):
    """Run the path stage on the selected route."""
    record = load_session(session_id, state.data_dir)
    record = run_stage(record, "path", state.catalog, StageOptions(label=label, seed=state.seed))
    save_session(record, state.data_dir)
    path = record.path
    click.echo(f"route: {'>'.join(path.node_ids)}")
    click.echo(f"waypoints: {len(path.waypoints)}  length: {path.total_length_m / 1000.0:.1f} km")
    click.echo(
        "weather risk: {:.3f}  ground exposure: {:.1f}  violation: {:.1f} m".format(
            sum(s.weather_risk for s in path.segments),
            sum(s.ground_exposure for s in path.segments),
            sum(s.violation_m for s in path.segments),
        )
    )


@main.command("build-traj")
@click.argument("session_id")
@click.pass_obj
@_fail_on_nelv_error
def build_traj(state: CliState, session_id: str):
    """Run the trajectory stage: circuits, waypoints and loiters."""
    record = load_session(session_id, state.data_dir)
    record = run_stage(record, "trajectory", state.catalog)
    save_session(record, state.data_dir)
    kinds = [command.kind for command in record.trajectory.commands]
    click.echo(f"commands: {len(kinds)}")
    click.echo(" ".join(kinds))


@main.command()
@click.argument("session_id")
@click.pass_obj
@_fail_on_nelv_error
def upload(state: CliState, session_id: str):
    """Stamp the mission as uploaded and freeze the session."""
    record = load_session(session_id, state.data_dir)
    record = run_stage(record, "upload", state.catalog)
    save_session(record, state.data_dir)
    click.echo(f"session {record.session_id} uploaded; the session is now read-only")


@main.command()
@click.argument("session_id")
@click.option("-o", "--output", type=click.Path(path_type=Path, dir_okay=False), default=None)
@click.pass_obj
@_fail_on_nelv_error
def export(state: CliState, session_id: str, output: Path | None):
    """Write the mission file to stdout or a file."""
    record = load_session(session_id, state.data_dir)
    if record.trajectory is None:
        raise click.ClickException("stage 'export' requires 'trajectory' to complete first")
    data = export_mission(record.trajectory)
    if output is None:
        sys.stdout.buffer.write(data)
    else:
        output.write_bytes(data)
        click.echo(f"wrote {output}")


if __name__ == "__main__":
    main()
