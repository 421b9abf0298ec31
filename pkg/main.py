import logging
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np
import typer
from pydantic import ValidationError

from artifacts import write_csv, write_json, write_svg
from errors import (
    BrokenPTPhase,
    InvalidGrid,
    InvalidParameters,
    NoPeakFound,
    PdemScatterError,
    SubThresholdEnergy,
)
from models import (
    RunConfig,
    SolverKind,
    locate_spectral_singularity,
    match_and_scatter,
    mass_at,
    phase_nonlinearity,
    potential_at,
    pt_current_trace,
    sweep,
    symmetric_points,
    transmission_scan,
    wavefunction_trace,
    worker_count,
)
from models.config import OutputKind, log_level
from models.observables import SCAN_POINTS

logger = logging.getLogger(__name__)

app = typer.Typer(
    help="Scattering on a PT-symmetric double heterojunction with position-dependent mass.",
    no_args_is_help=True,
    add_completion=False,
)

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_NO_PEAK = 4
EXIT_SPREAD = 5

FAILED_ROW_LIMIT = 0.1
SPREAD_LIMIT = 1e-4
TRACE_POINTS = 801
TRACE_MARGIN = 2.0


class CommandFailed(Exception):
    """
    Command finished its artifacts but failed its acceptance gate.
    """

    def __init__(self, exit_code: int, message: str) -> None:
        self.exit_code = exit_code
        super().__init__(message)


def load_config(
    config_path: Path, out: Optional[Path] = None, energy: Optional[float] = None
) -> RunConfig:
    """
    Read a run configuration, applying command-line overrides.
    """
    config = RunConfig.from_file(config_path)
    updates = {}
    if out is not None:
        updates["out_dir"] = out
    if energy is not None:
        updates["energy"] = energy
    return config.model_copy(update=updates) if updates else config


def _energy(config: RunConfig) -> float:
    if config.energy is None:
        raise InvalidParameters("This command needs an energy: pass --energy or set 'energy'")
    return config.energy


def cmd_sweep(config: RunConfig) -> List[Path]:
    """
    Reflection and transmission spectra for both incidence directions.
    """
    window = config.energy_window
    rows = sweep(
        config.params,
        window.E_min,
        window.E_max,
        window.n_points,
        solver=config.solver,
        slices=config.slices,
        padding=config.padding,
        workers=worker_count(),
    )
    out = config.out_dir
    csv_path = write_csv(
        out / "sweep.csv",
        ["energy", "T2", "R2_left", "R2_right", "flux_deficit", "solver", "condition_flag"],
        (
            [r.energy, r.T2, r.R2_left, r.R2_right, r.flux_deficit, r.solver, r.condition_flag]
            for r in rows
        ),
    )

    series = []
    styles = {SolverKind.Analytic: "-", SolverKind.Oracle: ":"}
    for kind in config.solver.kinds:
        kind_rows = [r for r in rows if r.solver == kind]
        suffix = f" ({kind.value})" if len(config.solver.kinds) > 1 else ""
        series += [
            ("|T|^2" + suffix, [r.T2 for r in kind_rows], "C0" + styles[kind]),
            ("|R_L|^2" + suffix, [r.R2_left for r in kind_rows], "C1" + styles[kind]),
            ("|R_R|^2" + suffix, [r.R2_right for r in kind_rows], "C2" + styles[kind]),
        ]
    energies = np.linspace(window.E_min, window.E_max, window.n_points)
    svg_path = write_svg(out / "sweep.svg", series, "E", "intensity", energies)

    failed = sum(r.failed for r in rows)
    if failed > FAILED_ROW_LIMIT * len(rows):
        raise CommandFailed(EXIT_SOLVER, f"{failed} of {len(rows)} sweep rows failed")
    return [csv_path, svg_path]


def cmd_wavefunction(config: RunConfig) -> List[Path]:
    """
    Scattering wavefunction across both junctions.
    """
    E = _energy(config)
    params = config.params
    z = symmetric_points(params.a0 + TRACE_MARGIN, TRACE_POINTS)
    result = match_and_scatter(E, params, config.direction)
    psi = wavefunction_trace(E, params, config.direction, z, result)

    out = config.out_dir
    csv_path = write_csv(
        out / "psi.csv",
        ["z", "re_psi", "im_psi", "abs_psi"],
        zip(z, psi.real, psi.imag, np.abs(psi)),
    )
    svg_path = write_svg(
        out / "psi.svg",
        [("Re psi", psi.real, "C0-")],
        "z",
        "Re psi(z)",
        z,
        title=f"E = {E:.6g}, {config.direction.value}",
        vlines=(-params.a0, params.a0),
    )

    metric = phase_nonlinearity(z, psi, params.a0)
    typer.echo(
        f"wavefunction E={E:.6g}: |T|^2={result.T2:.6g} |R|^2={result.R2:.6g} "
        f"interior wavelength spread={metric.interior_spread} "
        f"exterior wavelength spread={metric.exterior_spread}"
    )
    return [csv_path, svg_path]


def cmd_singularity(config: RunConfig) -> List[Path]:
    """
    Locate the spectral singularity of a PT-symmetric barrier.
    """
    params = config.params
    window = (config.energy_window.E_min, config.energy_window.E_max)
    energies = np.linspace(window[0], window[1], SCAN_POINTS)
    scan = transmission_scan(params, energies)
    report = locate_spectral_singularity(
        params, window, peak_threshold=config.peak_threshold, scan=scan
    )

    out = config.out_dir
    json_path = write_json(out / "singularity.json", report)
    svg_path = write_svg(
        out / "singularity.svg",
        [
            ("|T|^2", scan.T2, "C0-"),
            ("|R_L|^2", scan.R2_left, "C1-"),
            ("|R_R|^2", scan.R2_right, "C2-"),
        ],
        "E",
        "intensity",
        scan.energies,
        logy=True,
        marker=(report.E_located, report.peak_T2),
    )
    typer.echo(
        f"singularity: E_located={report.E_located:.10g} peak |T|^2={report.peak_T2:.6g} "
        f"E_linear={report.E_linear:.6g} E_squared={report.E_squared:.6g} "
        f"E_mapped={report.E_mapped:.6g}"
    )
    return [json_path, svg_path]


def cmd_continuity(config: RunConfig) -> List[Path]:
    """
    PT-current across the junctions; fails the run when it is not constant.
    """
    E = _energy(config)
    params = config.params
    z = symmetric_points(params.a0 + TRACE_MARGIN, TRACE_POINTS)
    trace = pt_current_trace(E, params, config.direction, z)
    csv_path = write_csv(
        config.out_dir / "ptcurrent.csv",
        ["z", "re_J", "im_J"],
        zip(trace.z, trace.J.real, trace.J.imag),
    )
    typer.echo(f"PT-current spread: {trace.spread:.3e} (mean {trace.J_mean:.6g})")
    if trace.spread > SPREAD_LIMIT:
        raise CommandFailed(EXIT_SPREAD, f"PT-current spread {trace.spread:.3e} exceeds {SPREAD_LIMIT}")
    return [csv_path]


def cmd_profile(config: RunConfig) -> List[Path]:
    """
    Mass and potential profiles.
    """
    params = config.params
    z = symmetric_points(params.a0 + TRACE_MARGIN, TRACE_POINTS)
    m = np.asarray(mass_at(z, params))
    V = np.asarray(potential_at(z, params))

    out = config.out_dir
    csv_path = write_csv(out / "profile.csv", ["z", "m", "re_V", "im_V"], zip(z, m, V.real, V.imag))
    svg_path = write_svg(
        out / "profile.svg",
        [("m(z)", m, "C0-"), ("Re V(z)", V.real, "C1-"), ("Im V(z)", V.imag, "C2-")],
        "z",
        "m, V",
        z,
        vlines=(-params.a0, params.a0),
    )
    return [csv_path, svg_path]


COMMANDS = {
    OutputKind.sweep: cmd_sweep,
    OutputKind.wavefunction: cmd_wavefunction,
    OutputKind.singularity: cmd_singularity,
    OutputKind.continuity: cmd_continuity,
    OutputKind.profile: cmd_profile,
}


def cmd_run(config: RunConfig) -> List[Path]:
    """
    Produce every artifact listed in the configuration's outputs, in order.
    """
    if not config.outputs:
        raise InvalidParameters("The configuration requests no outputs")
    paths: List[Path] = []
    for kind in config.outputs:
        logger.info("Producing %s", kind.value)
        paths.extend(COMMANDS[kind](config))
    return paths


def _configure_logging(verbose: bool) -> None:
    level = logging.INFO if verbose else getattr(logging, log_level(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def _run(
    command: Callable[[RunConfig], List[Path]],
    config_path: Path,
    out: Optional[Path],
    energy: Optional[float],
    verbose: bool,
) -> None:
    """
    Run a command and translate failures into the documented exit codes.
    """
    _configure_logging(verbose)
    try:
        config = load_config(config_path, out, energy)
        paths = command(config)
    except (ValidationError, InvalidParameters, InvalidGrid, SubThresholdEnergy, BrokenPTPhase) as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(EXIT_CONFIG)
    except OSError as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(EXIT_CONFIG)
    except NoPeakFound as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(EXIT_NO_PEAK)
    except CommandFailed as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(exc.exit_code)
    except PdemScatterError as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(EXIT_SOLVER)
    for path in paths:
        logger.info("Wrote %s", path)


ConfigOption = typer.Option(..., "--config", "-c", help="JSON run configuration")
OutOption = typer.Option(None, "--out", "-o", help="Output directory, overrides out_dir")
EnergyOption = typer.Option(None, "--energy", "-e", help="Energy, overrides the config")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Log progress at INFO level")


@app.command("sweep")
def sweep_command(
    config: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    energy: Optional[float] = EnergyOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Write sweep.csv and sweep.svg.
    """
    _run(cmd_sweep, config, out, energy, verbose)


@app.command("wavefunction")
def wavefunction_command(
    config: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    energy: Optional[float] = EnergyOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Write psi.csv and psi.svg.
    """
    _run(cmd_wavefunction, config, out, energy, verbose)


@app.command("singularity")
def singularity_command(
    config: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    energy: Optional[float] = EnergyOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Write singularity.json and singularity.svg.
    """
    _run(cmd_singularity, config, out, energy, verbose)


@app.command("continuity")
def continuity_command(
    config: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    energy: Optional[float] = EnergyOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Write ptcurrent.csv and check that the PT-current is constant.
    """
    _run(cmd_continuity, config, out, energy, verbose)


@app.command("profile")
def profile_command(
    config: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    energy: Optional[float] = EnergyOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Write profile.csv and profile.svg.
    """
    _run(cmd_profile, config, out, energy, verbose)


@app.command("run")
def run_command(
    config: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    energy: Optional[float] = EnergyOption,
    verbose: bool = VerboseOption,
) -> None:
    """
    Write every artifact listed under outputs in the configuration.
    """
    _run(cmd_run, config, out, energy, verbose)


if __name__ == "__main__":
    app()
