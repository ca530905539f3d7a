"""Turn a ``[model]`` table into a d-metric, the source it solves and the evaluator that checks it."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import replace
from typing import TYPE_CHECKING
from typing import Literal

from finsler_forge.ansatzgen.cosmo4d import COORDINATES as COSMO4D_COORDINATES
from finsler_forge.ansatzgen.cosmo4d import CosmoRecipe
from finsler_forge.ansatzgen.cosmo4d import generate_4d_cosmo
from finsler_forge.ansatzgen.eight import FRW_COORDINATES
from finsler_forge.ansatzgen.eight import SOLITONIC_COORDINATES
from finsler_forge.ansatzgen.eight import FansParams
from finsler_forge.ansatzgen.eight import SolitonicCoefficients
from finsler_forge.ansatzgen.eight import conformal_base
from finsler_forge.ansatzgen.eight import diagonal_fans
from finsler_forge.ansatzgen.eight import fans_shell
from finsler_forge.ansatzgen.eight import fans_source
from finsler_forge.ansatzgen.eight import generate_8d_solitonic
from finsler_forge.ansatzgen.eight import generate_three_shell
from finsler_forge.ansatzgen.generators import generate_sol1
from finsler_forge.ansatzgen.recipes import ShellRecipe
from finsler_forge.ansatzgen.recipes import SolutionRecipe
from finsler_forge.ansatzgen.recipes import Source
from finsler_forge.ansatzgen.recipes import check_kind
from finsler_forge.exceptions import ConfigError
from finsler_forge.expressions import compile_field
from finsler_forge.finsler import builtin_generator
from finsler_forge.finsler import sasaki_lift
from finsler_forge.jetcalc import SPECTRAL_NODES
from finsler_forge.jetcalc import ScalarField
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import MetricBlocks
from finsler_forge.nholon import ShellBlocks
from finsler_forge.nholon import matrix_rule
from finsler_forge.soliton import SolitonParams

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy as np

    from finsler_forge.ansatzgen.eight import ShellSpec
    from finsler_forge.ansatzgen.recipes import Coefficient
    from finsler_forge.config import Expr
    from finsler_forge.config import FansConfig
    from finsler_forge.config import ModelConfig
    from finsler_forge.config import SolitonConfig
    from finsler_forge.config import SourceConfig
    from finsler_forge.finsler import FinslerFunction
    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import MatrixRule

logger: logging.Logger = logging.getLogger(__name__)

type Evaluator = Literal["separated", "eight", "generic"]

SOL1_COORDINATES: tuple[str, ...] = ("x1", "x2", "v", "y")
GENERATOR_CONNECTION: str = "hv"
SOURCE_KEYS: tuple[str, ...] = ("upsilon2", "upsilon4", "upsilon6", "upsilon8")


@dataclass(frozen=True)
class BuiltModel:
    """A configured model ready for a command."""

    metric: DMetric
    source: Source
    """The source the model solves, with ``[source]`` overrides applied."""

    evaluator: Evaluator
    """Residual evaluator matching the model's shape."""

    coordinates: tuple[str, ...]
    finsler: FinslerFunction | None = None


class Compiler:
    """Compiles coefficient expressions against one coordinate list."""

    def __init__(self, coordinates: Sequence[str], parameters: dict[str, float]) -> None:
        self.coordinates: tuple[str, ...] = tuple(coordinates)
        self.parameters: dict[str, float] = parameters

    def __call__(self, expression: Expr) -> Coefficient:
        if isinstance(expression, int | float):
            return float(expression)
        return compile_field(expression, self.coordinates, self.parameters)

    def pair(self, expressions: Sequence[Expr]) -> tuple[Coefficient, Coefficient]:
        return self(expressions[0]), self(expressions[1])

    def many(self, expressions: Sequence[Expr]) -> tuple[Coefficient, ...]:
        return tuple(self(e) for e in expressions)

    def source(self, table: SourceConfig, own: Source | None = None) -> Source:
        """Overlay the entries of a ``[source]`` table on a model's own source.

        Returns:
            The combined source.
        """
        changes: dict[str, Coefficient] = {
            key: self(value) for key in SOURCE_KEYS if (value := getattr(table, key)) is not None
        }
        return replace(own or Source(), **changes)


def perturbed(metric: DMetric, factor: float, entry: int = -1) -> DMetric:
    """Scale one diagonal entry of the outermost shell by ``1 + factor``.

    Args:
        metric: The d-metric to perturb.
        factor: Relative change.
        entry: Diagonal index inside the outermost shell; the last one by default.

    Returns:
        The perturbed d-metric.
    """

    def evaluate(point: Sequence[Number]) -> MetricBlocks:
        blocks: MetricBlocks = metric.blocks(point)
        top: ShellBlocks = blocks.shells[-1]
        h: np.ndarray = top.h.copy()
        h[entry, entry] = h[entry, entry] * (1.0 + factor)
        return MetricBlocks(g=blocks.g, shells=(*blocks.shells[:-1], ShellBlocks(h=h, N=top.N)))

    return DMetric(n=metric.n, shell_dims=metric.shell_dims, evaluate=evaluate, name=f"{metric.name} (perturbed)")


def soliton_params(table: SolitonConfig) -> SolitonParams:
    """Line-soliton data of a ``[soliton]`` table.

    Returns:
        The parameters.
    """
    return SolitonParams(
        kappa=table.kappa,
        l=table.l,
        eps_sign=table.eps_sign,
        amplitude=table.amplitude,
        omega=table.omega,
    )


def fans_params(table: FansConfig | None, parameters: dict[str, float]) -> FansParams:
    """Prime data of the 8-d models; scale factors compile over ``t`` alone.

    Returns:
        The parameters.
    """
    if table is None:
        return FansParams()
    time: Compiler = Compiler(("t",), parameters)
    return FansParams(ha=time(table.ha), va=time(table.va), hk=table.hk, vk=table.vk, eps1=table.eps1)


def model_coordinates(model: ModelConfig) -> tuple[str, ...]:
    """Coordinate names of a model, checked against its dimension where the kind fixes one.

    Returns:
        The names.

    Raises:
        ConfigError: If the names do not fit the kind.
    """
    defaults: dict[str, tuple[str, ...]] = {
        "sol1": SOL1_COORDINATES,
        "cosmo4d": COSMO4D_COORDINATES,
        "fans": FRW_COORDINATES,
        "three_shell": FRW_COORDINATES,
        "solitonic": SOLITONIC_COORDINATES,
    }
    if model.kind not in defaults:
        return tuple(model.coordinates or ())
    names: tuple[str, ...] = tuple(model.coordinates or defaults[model.kind])
    if len(names) != len(defaults[model.kind]):
        msg: str = f"Model {model.kind!r} has {len(defaults[model.kind])} coordinates, got names {names}"
        raise ConfigError(msg)
    return names


def _sol1(model: ModelConfig, compile_: Compiler, table: SourceConfig, nodes: int) -> tuple[DMetric, Source]:
    r = model.recipe
    if r is None:
        msg: str = "Model kind 'sol1' needs a [model.recipe] table"
        raise ConfigError(msg)
    recipe: SolutionRecipe = SolutionRecipe(
        psi=compile_(r.psi),
        f=compile_(r.f),
        signs=r.signs,
        f0=compile_(r.f0),
        h0=compile_(r.h0),
        varsigma0=compile_(r.varsigma0),
        w0=compile_.pair(r.w0),
        n0=compile_.pair(r.n0),
        n1=compile_.pair(r.n1),
        source=compile_.source(table),
        v0=0.0 if r.v0 is None else r.v0,
        printed_formulas=r.printed_formulas,
    )
    connection: str = model.connection or GENERATOR_CONNECTION
    return generate_sol1(recipe, check_kind(connection), nodes), recipe.residual_source()


def _cosmo4d(model: ModelConfig, compile_: Compiler, table: SourceConfig, nodes: int) -> tuple[DMetric, Source]:
    r = model.recipe
    recipe: CosmoRecipe = CosmoRecipe.identity()
    if r is not None:
        recipe = CosmoRecipe(
            f=compile_(r.f),
            f0=compile_(r.f0),
            psi=compile_(r.psi),
            ha=compile_(r.ha),
            h0=compile_(r.h0),
            varsigma0=compile_(r.varsigma0),
            w0=compile_.pair(r.w0),
            n0=compile_.pair(r.n0),
            v0=recipe.v0 if r.v0 is None else r.v0,
        )
    recipe = replace(recipe, source=compile_.source(table, recipe.source))
    connection: str = model.connection or GENERATOR_CONNECTION
    return generate_4d_cosmo(recipe, check_kind(connection), nodes), recipe.solution.residual_source()


def _three_shell(model: ModelConfig, compile_: Compiler, nodes: int) -> tuple[DMetric, Source]:
    fans: FansParams = fans_params(model.fans, model.parameters)
    prime_source: Source = fans_source(fans)
    base = conformal_base(compile_(model.base_psi), model.base_signs)
    specs: list[ShellSpec] = []
    sources: list[Coefficient] = []
    for index, s in enumerate(model.shells):
        if s.prescribed:
            specs.append(fans_shell(fans, index))
            sources.append(prime_source.shell(index))
            continue
        recipe: ShellRecipe = ShellRecipe(
            f=compile_(s.f),
            source=compile_(s.source),
            f0=compile_(s.f0),
            h0=compile_(s.h0),
            varsigma0=compile_(s.varsigma0),
            w0=compile_.many(s.w0),
            n0=compile_.many(s.n0),
            n1=compile_.many(s.n1),
            signs=s.signs,
        )
        specs.append(recipe)
        sources.append(recipe.source)
    metric: DMetric = generate_three_shell(base, specs, v0=model.v0, nodes=nodes, literal=model.literal)
    source: Source = Source(
        upsilon2=ScalarField(dim=8, fn=base.source, name="upsilon2"),
        upsilon4=sources[0],
        upsilon6=sources[1],
        upsilon8=sources[2],
    )
    return metric, source


def _inline(model: ModelConfig, compile_: Compiler) -> DMetric:
    table = model.inline
    if table is None:
        msg: str = "Model kind 'inline' needs a [model.inline] table"
        raise ConfigError(msg)
    dims: list[int] = [len(shell.h) for shell in table.shells]
    if len(compile_.coordinates) != table.n + sum(dims):
        msg = f"Inline metric has {table.n + sum(dims)} coordinates, names given: {compile_.coordinates}"
        raise ConfigError(msg)

    def rule(rows: list[list[Expr]]) -> MatrixRule:
        return matrix_rule([[compile_(e) for e in row] for row in rows])

    shells: list[tuple[MatrixRule, MatrixRule]] = [(rule(s.h), rule(s.N)) for s in table.shells]
    return DMetric.from_rules(g=rule(table.g), shells=shells, n=table.n, shell_dims=dims, name="inline d-metric")


def _solitonic(model: ModelConfig) -> DMetric:
    table: SolitonConfig | None = model.soliton
    if table is None:
        msg: str = "Model kind 'solitonic' needs a [model.soliton] table"
        raise ConfigError(msg)
    return generate_8d_solitonic(
        soliton_params(table),
        fans_params(model.fans, model.parameters),
        coefficients=SolitonicCoefficients(**table.coefficients),
    )


def build_model(model: ModelConfig, source: SourceConfig, nodes: int = SPECTRAL_NODES) -> BuiltModel:
    """Build the metric a command works on.

    Args:
        model: The ``[model]`` table.
        source: The ``[source]`` table; its entries replace the model's own source.
        nodes: Spectral nodes when the model table does not set them.

    Returns:
        The built model.

    Raises:
        ConfigError: If the tables do not describe a model.
    """
    count: int = model.nodes or nodes
    finsler: FinslerFunction | None = None
    evaluator: Evaluator = "generic"
    own: Source = Source()

    if model.kind == "finsler":
        if model.finsler is None:
            msg: str = "Model kind 'finsler' needs a [model.finsler] table"
            raise ConfigError(msg)
        finsler = builtin_generator(model.finsler.generator, model.finsler.params)
        names: tuple[str, ...] = model_coordinates(model) or tuple(f"u{k}" for k in range(finsler.dim))
        metric: DMetric = sasaki_lift(finsler)
    else:
        names = model_coordinates(model)
    compile_: Compiler = Compiler(names, model.parameters)

    match model.kind:
        case "sol1":
            metric, own = _sol1(model, compile_, source, count)
            evaluator = "separated"
        case "cosmo4d":
            metric, own = _cosmo4d(model, compile_, source, count)
            evaluator = "separated"
        case "fans":
            fans: FansParams = fans_params(model.fans, model.parameters)
            metric, own = diagonal_fans(fans, "frw"), fans_source(fans)
            evaluator = "eight"
        case "three_shell":
            metric, own = _three_shell(model, compile_, count)
            evaluator = "eight"
        case "solitonic":
            metric = _solitonic(model)
        case "inline":
            metric = _inline(model, compile_)
        case _:
            pass

    if model.perturb:
        metric = perturbed(metric, model.perturb)
        logger.warning("Model %s perturbed by a relative %g", model.kind, model.perturb)
    logger.info("Built %s model %s", model.kind, metric.name)
    if evaluator != "separated":
        own = compile_.source(source, own)
    return BuiltModel(
        metric=metric,
        source=own,
        evaluator=evaluator,
        coordinates=names,
        finsler=finsler,
    )
