"""Command line entry points.

Exit codes: 0 success, 1 timeout (or differing traces for trace diff),
2 validation failure, 3 runtime failure.
"""

import json
import sys
from typing import Optional

import click

from .lint import lint_program
from .program import Program, ProgramError, load_program
from .runtime import SessionConfig, run_headless
from .scenario import Scenario, ScenarioError, load_scenario, resolve_fixture
from .script import HumanScript, ScriptError, empty_script, load_script
from .service import ServiceConfig, create_app
from .trace import ExecutionTrace, first_divergence

EXIT_TIMEOUT = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _load_scenario(ref: str) -> Scenario:
    return load_scenario(resolve_fixture("scenarios", ref))


def _load_program(ref: str, scenario: Scenario) -> Optional[Program]:
    if not ref:
        return None
    return load_program(resolve_fixture("programs", ref), scenario)


def _load_script(ref: str) -> HumanScript:
    if not ref:
        return empty_script()
    return load_script(resolve_fixture("scripts", ref))


@click.group()
def main() -> None:
    """Simulated robot workcell with live trigger-action programming."""


# ---------------------------------------------------------------------------
# run


@main.command()
@click.argument("scenario_ref", metavar="SCENARIO")
@click.option("--program", "program_ref", default="",
              help="Program fixture name or path.")
@click.option("--script", "script_ref", default="",
              help="Scripted human fixture name or path.")
@click.option("--stepped/--realtime", default=True, show_default=True,
              help="Advance one primitive per tick, or follow the clock.")
@click.option("--seed", default=0, show_default=True)
@click.option("--max-ticks", default=2000, show_default=True)
@click.option("--min-ticks", default=0, show_default=True,
              help="Keep ticking at least this long before quiescence.")
@click.option("--tick-ms", default=500, show_default=True)
@click.option("--trace", "trace_out", default="",
              type=click.Path(dir_okay=False),
              help="Write the event trace to this file.")
def run(scenario_ref: str, program_ref: str, script_ref: str, stepped: bool,
        seed: int, max_ticks: int, min_ticks: int, tick_ms: int,
        trace_out: str) -> None:
    """Run a session headlessly until quiescence or the tick budget."""
    try:
        scenario = _load_scenario(scenario_ref)
        program = _load_program(program_ref, scenario)
        script = _load_script(script_ref)
        config = SessionConfig(tick_period_ms=tick_ms, stepped=stepped,
                               random_seed=seed, max_ticks=max_ticks,
                               min_ticks=min_ticks)
    except (ScenarioError, ProgramError, ScriptError, FileNotFoundError,
            ValueError) as error:
        _fail(EXIT_VALIDATION, f"invalid input: {error}")
    try:
        result = run_headless(scenario, program, script, config)
    except Exception as error:
        _fail(EXIT_RUNTIME, f"runtime failure: {error}")
    if trace_out:
        result.trace.write(trace_out)
    completed = len(result.trace.of_kind("ActionCompleted"))
    aborted = len(result.trace.of_kind("ActionAborted"))
    warnings = len(result.trace.of_kind("Warning"))
    click.echo(f"ticks: {result.ticks}")
    click.echo(f"events: {len(result.trace)}")
    click.echo(f"actions: {completed} completed, {aborted} aborted,"
               f" {warnings} warnings")
    click.echo(f"digest: {result.trace.digest()}")
    if result.timed_out:
        _fail(EXIT_TIMEOUT, f"timed out after {result.ticks} ticks")


# ---------------------------------------------------------------------------
# serve


@main.command()
@click.argument("scenario_ref", metavar="[SCENARIO]", required=False,
                default="")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--tick-ms", default=500, show_default=True)
@click.option("--ui", "ui_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Directory with a built web UI to serve under /ui.")
def serve(scenario_ref: str, host: str, port: int, tick_ms: int,
          ui_dir: Optional[str]) -> None:
    """Serve the session API; optionally pre-open a scenario session."""
    if tick_ms <= 0:
        _fail(EXIT_VALIDATION, "--tick-ms must be a positive number"
                               " of milliseconds")
    if scenario_ref:
        try:
            resolve_fixture("scenarios", scenario_ref)
        except FileNotFoundError as error:
            _fail(EXIT_VALIDATION, str(error))
    app = create_app(ServiceConfig(tick_period_ms=tick_ms,
                                   preload_scenario=scenario_ref or None,
                                   ui_dir=ui_dir))
    import uvicorn
    uvicorn.run(app, host=host, port=port, log_level="warning")


# ---------------------------------------------------------------------------
# lint


@main.command()
@click.argument("program_ref", metavar="PROGRAM")
@click.option("--scenario", "scenario_ref", required=True,
              help="Scenario fixture name or path the program runs in.")
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "structured"]))
def lint(program_ref: str, scenario_ref: str, fmt: str) -> None:
    """Report chains, conflicts, self-retrigger risks, and dangling refs."""
    try:
        scenario = _load_scenario(scenario_ref)
        program = _load_program(program_ref, scenario)
    except (ScenarioError, ProgramError, FileNotFoundError) as error:
        _fail(EXIT_VALIDATION, f"invalid input: {error}")
    report = lint_program(program, scenario)
    if fmt == "structured":
        click.echo(json.dumps(report.to_payload(), indent=2,
                              sort_keys=True))
    else:
        click.echo(report.render())


# ---------------------------------------------------------------------------
# trace inspection


@main.group()
def trace() -> None:
    """Digest or compare recorded event traces."""


@trace.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def digest(path: str) -> None:
    """Print the digest of one trace file."""
    try:
        click.echo(ExecutionTrace.read(path).digest())
    except ValueError as error:
        _fail(EXIT_VALIDATION, f"invalid trace: {error}")


@trace.command()
@click.argument("left", type=click.Path(exists=True, dir_okay=False))
@click.argument("right", type=click.Path(exists=True, dir_okay=False))
def diff(left: str, right: str) -> None:
    """Report the first divergence between two traces, if any."""
    try:
        divergence = first_divergence(ExecutionTrace.read(left),
                                      ExecutionTrace.read(right))
    except ValueError as error:
        _fail(EXIT_VALIDATION, f"invalid trace: {error}")
    if divergence is None:
        click.echo("identical")
    else:
        _fail(EXIT_TIMEOUT, divergence)


if __name__ == "__main__":
    main()
