"""Batch command line: read a run configuration, dispatch the command, write its CSV tables."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.eight import residuals_8d
from finsler_forge.ansatzgen.separated import residuals_generic
from finsler_forge.ansatzgen.separated import residuals_separated
from finsler_forge.builders import GENERATOR_CONNECTION
from finsler_forge.builders import BuiltModel
from finsler_forge.builders import build_model
from finsler_forge.builders import soliton_params
from finsler_forge.config import COMMANDS
from finsler_forge.config import RunConfig
from finsler_forge.config import load_config
from finsler_forge.connections import get_connection
from finsler_forge.cosmo import CosmoParams
from finsler_forge.cosmo import CosmoState
from finsler_forge.cosmo import integrate_trajectory
from finsler_forge.cosmo import literal_regime_table
from finsler_forge.cosmo import sweep_regimes
from finsler_forge.dcurv import curvature_pack
from finsler_forge.exceptions import ConfigError
from finsler_forge.exceptions import ExpressionParseError
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import ModelError
from finsler_forge.exceptions import NumericError
from finsler_forge.exceptions import PreconditionError
from finsler_forge.finsler import hessian_metric
from finsler_forge.history import RunOutcome
from finsler_forge.history import ledger_engine
from finsler_forge.history import record_run
from finsler_forge.reporting import SCHEMAS
from finsler_forge.reporting import ReportRow
from finsler_forge.reporting import export_csv
from finsler_forge.reporting import format_point
from finsler_forge.settings import ForgeSettings
from finsler_forge.soliton import kp_line_soliton
from finsler_forge.soliton import modulated_fraction
from finsler_forge.soliton import regime_flip

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

    from finsler_forge.ansatzgen.recipes import ResidualReport
    from finsler_forge.config import ModelConfig
    from finsler_forge.connections.base import DConnectionCoeffs
    from finsler_forge.cosmo import Trajectory
    from finsler_forge.dcurv import CurvaturePack
    from finsler_forge.soliton import LineSoliton

logger: logging.Logger = logging.getLogger(__name__)

EXIT_OK: int = 0
EXIT_RESIDUAL: int = 1
EXIT_INPUT: int = 2
EXIT_MODEL: int = 3
EXIT_NUMERIC: int = 4

LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class RunContext:
    """A validated configuration with flag and settings precedence resolved."""

    config: RunConfig
    out: Path
    threads: int
    tolerance: float
    nodes: int


@dataclass
class CommandResult:
    """Tables produced by one command."""

    tables: dict[str, list[ReportRow]] = field(default_factory=dict)
    """Rows per schema name; each table is written to ``<out>/<name>.csv``."""

    exit_code: int = EXIT_OK
    max_residual: float | None = None


def _value(x: object) -> float:
    return jetcalc.primal(x)


def _points(ctx: RunContext, dim: int) -> list[tuple[float, ...]]:
    return ctx.config.points.sample(dim)


def _model_table(ctx: RunContext) -> ModelConfig:
    if ctx.config.model is None:
        msg: str = f"Command {ctx.config.command!r} needs a [model] table"
        raise ConfigError(msg)
    return ctx.config.model


def _model(ctx: RunContext) -> BuiltModel:
    return build_model(_model_table(ctx), ctx.config.source, nodes=ctx.nodes)


def _row(schema: str, *cells: object) -> ReportRow:
    return ReportRow.of(SCHEMAS[schema], cells)  # type: ignore[arg-type]


def run_hessian(ctx: RunContext) -> CommandResult:
    """Fiber Hessian ``g_ab`` of a Finsler model at every sample point.

    Returns:
        The ``hessian`` table.

    Raises:
        PreconditionError: If the model has no generating function.
    """
    built: BuiltModel = _model(ctx)
    if built.finsler is None:
        msg: str = "The hessian command needs a model of kind 'finsler'"
        raise PreconditionError(msg)
    rows: list[ReportRow] = []
    for point in _points(ctx, built.finsler.dim):
        g: np.ndarray = hessian_metric(built.finsler, point)
        label: str = format_point(point)
        rows.extend(_row("hessian", label, a, b, _value(g[a, b])) for a, b in np.ndindex(g.shape))
    return CommandResult(tables={"hessian": rows})


def run_connection(ctx: RunContext) -> CommandResult:
    """Coefficients of the configured d-connection at every sample point.

    Returns:
        The ``connection`` table, one row per coefficient.
    """
    built: BuiltModel = _model(ctx)
    conn = get_connection(_model_table(ctx).connection or "canonical")
    rows: list[ReportRow] = []
    for point in _points(ctx, built.metric.dim):
        coeffs: DConnectionCoeffs = conn(built.metric, point)
        label: str = format_point(point)
        for family in ("L_h", "L_v", "C_h", "C_v"):
            values: np.ndarray = getattr(coeffs, family)
            rows.extend(
                _row("connection", label, family, i, j, k, _value(values[i, j, k]))
                for i, j, k in np.ndindex(values.shape)
            )
    return CommandResult(tables={"connection": rows})


def run_curvature(ctx: RunContext) -> CommandResult:
    """Ricci d-tensor blocks and scalar curvature at every sample point.

    Returns:
        The ``curvature`` table; scalar rows leave ``i`` and ``j`` empty.
    """
    built: BuiltModel = _model(ctx)
    conn = get_connection(_model_table(ctx).connection or "canonical")
    rows: list[ReportRow] = []
    for point in _points(ctx, built.metric.dim):
        pack: CurvaturePack = curvature_pack(conn, built.metric, point)
        label: str = format_point(point)
        for block in ("R_ij", "R_ia", "R_ai", "R_ab"):
            values: np.ndarray = getattr(pack.ricci, block)
            rows.extend(
                _row("curvature", label, block, i, j, _value(values[i, j])) for i, j in np.ndindex(values.shape)
            )
        rows.extend(
            _row("curvature", label, name, None, None, _value(getattr(pack.scalar, name))) for name in ("sR", "R", "S")
        )
    return CommandResult(tables={"curvature": rows})


def residual_report(built: BuiltModel, ctx: RunContext) -> ResidualReport:
    """Scan the model's field equations with the evaluator matching its shape.

    Returns:
        Per-equation maxima over the sample points.
    """
    model: ModelConfig = _model_table(ctx)
    points: list[tuple[float, ...]] = _points(ctx, built.metric.dim)
    match built.evaluator:
        case "separated":
            kind: str = model.connection or GENERATOR_CONNECTION
            return residuals_separated(built.metric, kind, built.source, points, ctx.threads)
        case "eight":
            return residuals_8d(built.metric, built.source, points, ctx.threads, literal=model.literal)
        case _:
            return residuals_generic(built.metric, model.connection or "canonical", built.source, points, ctx.threads)


def run_verify(ctx: RunContext) -> CommandResult:
    """Check a model against its field equations.

    Returns:
        The ``verify`` summary and the per-equation ``residuals`` table; exit code 1 above tolerance.
    """
    built: BuiltModel = _model(ctx)
    report: ResidualReport = residual_report(built, ctx)
    worst, largest = report.worst
    passed: bool = report.passed(ctx.tolerance)
    if not passed:
        logger.warning("Residuals above %g: %s", ctx.tolerance, ", ".join(report.violations(ctx.tolerance)))
    summary: ReportRow = _row("verify", report.samples, worst, largest, ctx.tolerance, passed)
    per_equation: list[ReportRow] = [
        _row("residuals", name, value, format_point(report.argmax[name])) for name, value in report.maxima.items()
    ]
    return CommandResult(
        tables={"verify": [summary], "residuals": per_equation},
        exit_code=EXIT_OK if passed else EXIT_RESIDUAL,
        max_residual=largest,
    )


def run_cosmo_evolve(ctx: RunContext) -> CommandResult:
    """Integrate the diagonal cosmological model.

    Returns:
        The ``cosmo-evolve`` time series.
    """
    e = ctx.config.evolve
    params: CosmoParams = CosmoParams(
        hk=e.hk, vk=e.vk, h_omega=e.h_omega, v_omega=e.v_omega, G_bar=e.G_bar, eps1=e.eps1
    )
    state: CosmoState = CosmoState(ha=e.ha, va=e.va, ha_dot=e.hH * e.ha, va_dot=e.vH * e.va)
    trajectory: Trajectory = integrate_trajectory(
        state, (e.t_start, e.t_end), e.dt, params=params, closure=e.closure, rho0=e.rho0
    )
    if trajectory.singular_at is not None:
        logger.warning("Trajectory stopped at t=%g before a finite-time singularity", trajectory.singular_at)
    residual: float | None = None
    if e.closure == "full":
        residual = float(np.max(np.abs(trajectory.constraint)))
    return CommandResult(
        tables={"cosmo-evolve": [_row("cosmo-evolve", *r) for r in trajectory.rows()]},
        max_residual=residual,
    )


def run_cosmo_classify(ctx: RunContext) -> CommandResult:
    """Regime map over initial fractions, with the printed interval table alongside.

    Returns:
        The ``cosmo-classify`` table.
    """
    gammas: list[float] = ctx.config.classify.values()
    labels = sweep_regimes(gammas, threads=ctx.threads)
    rows: list[ReportRow] = [
        _row("cosmo-classify", g, label, "|".join(literal_regime_table(g)))
        for g, label in zip(gammas, labels, strict=True)
    ]
    return CommandResult(tables={"cosmo-classify": rows})


def run_soliton(ctx: RunContext) -> CommandResult:
    """Solve and certify a line soliton; optionally test whether its modulation flips the regime.

    Returns:
        The ``soliton`` table.
    """
    table = ctx.config.soliton
    soliton: LineSoliton = kp_line_soliton(soliton_params(table))
    if soliton.residual >= ctx.tolerance:
        logger.warning("Soliton grid residual %.3g is not below %g", soliton.residual, ctx.tolerance)
    gamma_tilde: float | None = None
    flipped: bool | None = None
    if table.gamma is not None:
        gamma_tilde = modulated_fraction(table.gamma, table.chi_star, table.varpi5_star, table.amplitude)
        flipped = regime_flip(table.gamma, gamma_tilde)
    row: ReportRow = _row(
        "soliton",
        table.kappa,
        table.l,
        table.eps_sign,
        soliton.omega,
        soliton.residual,
        2.0 * table.kappa**2,
        table.gamma,
        gamma_tilde,
        flipped,
    )
    return CommandResult(tables={"soliton": [row]}, max_residual=soliton.residual)


HANDLERS: dict[str, Callable[[RunContext], CommandResult]] = {
    "hessian": run_hessian,
    "connection": run_connection,
    "curvature": run_curvature,
    "verify": run_verify,
    "cosmo-evolve": run_cosmo_evolve,
    "cosmo-classify": run_cosmo_classify,
    "soliton": run_soliton,
}


def resolve_context(args: argparse.Namespace, config: RunConfig, settings: ForgeSettings) -> RunContext:
    """Merge flags, configuration and settings; flags win, settings are the fallback.

    Returns:
        The run context.

    Raises:
        ConfigError: If the configuration is for another command.
    """
    if config.command != args.command:
        msg: str = f"Configuration is for {config.command!r}, not {args.command!r}"
        raise ConfigError(msg)
    out: str = args.out or config.out or "."
    return RunContext(
        config=config,
        out=Path(out),
        threads=args.threads or config.threads or settings.threads,
        tolerance=args.tolerance or config.tolerance or settings.tolerance,
        nodes=settings.spectral_nodes,
    )


def execute(ctx: RunContext) -> tuple[int, list[Path], float | None]:
    """Run the command and write its tables.

    Returns:
        Exit code, files written and the largest residual reported.
    """
    logger.info("Running %s (threads=%d, tolerance=%g)", ctx.config.command, ctx.threads, ctx.tolerance)
    result: CommandResult = HANDLERS[ctx.config.command](ctx)
    written: list[Path] = [
        export_csv(rows, SCHEMAS[name], ctx.out / f"{name}.csv") for name, rows in result.tables.items()
    ]
    return result.exit_code, written, result.max_residual


def _record(outcome: RunOutcome, settings: ForgeSettings) -> None:
    try:
        record_run(outcome, ledger_engine(settings), settings)
    except SQLAlchemyError as e:
        logger.warning("Could not record the run in the ledger: %s", e)


def build_parser() -> argparse.ArgumentParser:
    """Command-line parser.

    Returns:
        The parser.
    """
    parser = argparse.ArgumentParser(
        prog="finsler-forge",
        description="Build, evaluate and verify nonholonomic Finsler geometry models.",
    )
    parser.add_argument("command", choices=COMMANDS, help="what to compute")
    parser.add_argument("--config", type=Path, required=True, help="TOML run configuration")
    parser.add_argument("--out", help="output directory (default: config 'out' or the working directory)")
    parser.add_argument("--threads", type=int, help="worker threads (env FINSLER_FORGE_THREADS)")
    parser.add_argument("--tolerance", type=float, help="residual tolerance for verify")
    parser.add_argument("--verbose", "-v", action="store_true", help="log progress at INFO level")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``finsler-forge`` command.

    Returns:
        0 on success, 1 when verify finds residuals above tolerance, 2 on input errors, 3 on model
        errors and 4 on numeric errors.
    """
    args: argparse.Namespace = build_parser().parse_args(argv)
    try:
        settings: ForgeSettings = ForgeSettings()
    except ValidationError as e:
        print(f"error: invalid FINSLER_FORGE_* settings: {e}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(
        level=logging.INFO if args.verbose else settings.numeric_log_level(),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    if args.threads is not None and args.threads <= 0:
        print(f"error: --threads must be positive, got {args.threads}", file=sys.stderr)
        return EXIT_INPUT
    if args.tolerance is not None and args.tolerance <= 0:
        print(f"error: --tolerance must be positive, got {args.tolerance}", file=sys.stderr)
        return EXIT_INPUT

    config_bytes: bytes = b""
    max_residual: float | None = None
    written: list[Path] = []
    try:
        config, config_bytes = load_config(args.config)
        ctx: RunContext = resolve_context(args, config, settings)
        code, written, max_residual = execute(ctx)
    except ExpressionParseError as e:
        print(f"error: {e}\n{e.caret()}", file=sys.stderr)
        code = EXIT_INPUT
    except (InputError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_INPUT
    except ModelError as e:
        print(f"model error: {e}", file=sys.stderr)
        code = EXIT_MODEL
    except NumericError as e:
        print(f"numeric error: {e}", file=sys.stderr)
        code = EXIT_NUMERIC

    if settings.ledger_enabled and config_bytes:
        outcome: RunOutcome = RunOutcome(
            command=args.command,
            config_bytes=config_bytes,
            exit_code=code,
            max_residual=max_residual,
            outputs=[str(p) for p in written],
        )
        _record(outcome, settings)
    return code
