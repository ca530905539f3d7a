"""Run configuration documents: TOML files validated into pydantic models.

A document names a command, the model it runs on and the sample points. Coefficients are numbers or
expression strings over the model's coordinate names and the ``parameters`` table.
"""

import logging
import tomllib
from typing import TYPE_CHECKING
from typing import Any
from typing import Literal

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import model_validator

from finsler_forge import jetcalc
from finsler_forge.exceptions import ConfigError

if TYPE_CHECKING:
    from pathlib import Path

logger: logging.Logger = logging.getLogger(__name__)

SPEC_VERSION: int = 1

type Command = Literal["hessian", "connection", "curvature", "verify", "cosmo-evolve", "cosmo-classify", "soliton"]
type ModelKind = Literal["finsler", "inline", "sol1", "cosmo4d", "fans", "three_shell", "solitonic"]
type Expr = str | float

COMMANDS: tuple[str, ...] = (
    "hessian",
    "connection",
    "curvature",
    "verify",
    "cosmo-evolve",
    "cosmo-classify",
    "soliton",
)


class _Table(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ShellConfig(_Table):
    """Generating data of one v-shell, or ``prescribed = true`` to take the prime metric's shell."""

    prescribed: bool = False
    f: Expr = 0.0
    f0: Expr = 0.0
    h0: Expr = 1.0
    varsigma0: Expr = 1.0
    source: Expr = 0.0
    w0: list[Expr] = []
    n0: list[Expr] = []
    n1: list[Expr] = []
    signs: tuple[int, int] = (1, 1)


class RecipeConfig(_Table):
    """Generating data of a four-dimensional solution or cosmological deformation."""

    psi: Expr = 0.0
    f: Expr = 1.0
    f0: Expr = 0.0
    h0: Expr = 1.0
    varsigma0: Expr = 1.0
    w0: tuple[Expr, Expr] = (0.0, 0.0)
    n0: tuple[Expr, Expr] = (0.0, 0.0)
    n1: tuple[Expr, Expr] = (0.0, 0.0)
    signs: tuple[int, int, int, int] = (1, 1, 1, 1)
    ha: Expr = 1.0
    """Scale factor of the cosmological prime metric."""

    v0: float | None = None
    printed_formulas: bool = False


class FansConfig(_Table):
    """Prime data of the eight-dimensional models; ``ha`` and ``va`` are expressions in ``t``."""

    ha: Expr = 1.0
    va: Expr = 1.0
    hk: float = 0.0
    vk: float = 0.0
    eps1: int = 1


class InlineShellConfig(_Table):
    """One shell of an inline metric: its block and its N block onto all earlier coordinates."""

    h: list[list[Expr]]
    N: list[list[Expr]]


class InlineConfig(_Table):
    """A d-metric given entry by entry."""

    n: int = Field(gt=0)
    g: list[list[Expr]]
    shells: list[InlineShellConfig] = Field(min_length=1, max_length=3)


class FinslerConfig(_Table):
    """A catalog generating function; its Sasaki lift is the model metric."""

    generator: str
    params: dict[str, Any] = {}


class SolitonConfig(_Table):
    """Line-soliton data and the optional modulation of a Hubble fraction."""

    kappa: float = 1.0
    l: float = 0.0  # noqa: E741
    eps_sign: int = 1
    amplitude: float = 0.0
    omega: float | None = None
    gamma: float | None = None
    chi_star: float = 0.0
    varpi5_star: float = 0.0
    coefficients: dict[str, float] = {}
    """First-order coefficients of the 8-d deformation (``varpi5``, ``varpi6``, ``w3``, ``w4``, ``n3``, ``n4``)."""


class SourceConfig(_Table):
    """Diagonal source; missing entries fall back to the model's own source."""

    upsilon2: Expr | None = None
    upsilon4: Expr | None = None
    upsilon6: Expr | None = None
    upsilon8: Expr | None = None


class ModelConfig(_Table):
    """The metric a command works on."""

    kind: ModelKind
    coordinates: list[str] | None = None
    """Coordinate names for expressions; each kind has a default."""

    parameters: dict[str, float] = {}
    connection: str | None = None
    """Connection family; generators default to ``hv``, the connection and curvature commands to ``canonical``."""

    nodes: int | None = Field(default=None, ge=3)
    perturb: float = 0.0
    """Relative perturbation of the outermost ``h`` entry, for witnessing failed checks."""

    literal: bool = False
    v0: float = 0.0
    """Base point of the v-integrations of generated three-shell shells."""

    recipe: RecipeConfig | None = None
    fans: FansConfig | None = None
    shells: list[ShellConfig] = []
    base_psi: Expr = 0.0
    base_signs: tuple[int, int] = (1, 1)
    inline: InlineConfig | None = None
    finsler: FinslerConfig | None = None
    soliton: SolitonConfig | None = None

    @model_validator(mode="after")
    def validate_tables(self) -> ModelConfig:
        """Validate that the table a kind needs is present.

        Returns:
            The validated model.

        Raises:
            ValueError: If the kind's table is missing.
        """
        needs: dict[str, object] = {
            "finsler": self.finsler,
            "inline": self.inline,
        }
        if self.kind in needs and needs[self.kind] is None:
            msg: str = f"Model kind {self.kind!r} needs a [model.{self.kind}] table"
            raise ValueError(msg)
        if self.kind == "three_shell" and len(self.shells) != 3:  # noqa: PLR2004
            msg = f"Model kind 'three_shell' needs three [[model.shells]] tables, got {len(self.shells)}"
            raise ValueError(msg)
        return self


class PointsConfig(_Table):
    """Sample points: explicit coordinates, or a scrambled Halton set in a box."""

    explicit: list[list[float]] | None = None
    count: int = Field(default=8, gt=0)
    low: list[float] | None = None
    high: list[float] | None = None
    seed: int = 0

    def sample(self, dim: int) -> list[tuple[float, ...]]:
        """Materialize the points.

        Returns:
            One tuple per point.

        Raises:
            ConfigError: If neither explicit points nor a box of the right dimension are given.
        """
        if self.explicit is not None:
            if any(len(p) != dim for p in self.explicit):
                msg: str = f"Explicit points must have {dim} coordinates"
                raise ConfigError(msg)
            return [tuple(float(v) for v in p) for p in self.explicit]
        if self.low is None or self.high is None or len(self.low) != dim or len(self.high) != dim:
            msg = f"Give [points] explicit coordinates or low/high corners with {dim} entries"
            raise ConfigError(msg)
        points: np.ndarray = jetcalc.halton_points(self.low, self.high, self.count, seed=self.seed)
        return [tuple(float(v) for v in row) for row in points]


class EvolveConfig(_Table):
    """Trajectory integration for ``cosmo-evolve``."""

    closure: Literal["hubble", "full"] = "hubble"
    hH: float = 1.0
    vH: float = 1.0
    ha: float = 1.0
    va: float = 1.0
    t_start: float = 0.0
    t_end: float = 1.0
    dt: float = Field(default=1e-3, gt=0)
    rho0: float | None = None
    hk: float = 0.0
    vk: float = 0.0
    h_omega: float = 0.0
    v_omega: float = 0.0
    G_bar: float = Field(default=1.0, gt=0)
    eps1: int = 1


class ClassifyConfig(_Table):
    """Initial fractions for ``cosmo-classify``: a list, or ``count`` values evenly spaced in a range."""

    gammas: list[float] | None = None
    start: float = -3.0
    stop: float = 4.0
    count: int = Field(default=15, gt=0)

    def values(self) -> list[float]:
        """The initial fractions.

        Returns:
            The values in output order.
        """
        if self.gammas is not None:
            return list(self.gammas)
        return [float(v) for v in np.linspace(self.start, self.stop, self.count)]


class RunConfig(_Table):
    """A whole run configuration document."""

    spec_version: int
    command: Command
    threads: int | None = Field(default=None, gt=0)
    tolerance: float | None = Field(default=None, gt=0)
    out: str | None = None
    model: ModelConfig | None = None
    source: SourceConfig = SourceConfig()
    points: PointsConfig = PointsConfig()
    evolve: EvolveConfig = EvolveConfig()
    classify: ClassifyConfig = ClassifyConfig()
    soliton: SolitonConfig = SolitonConfig()

    @model_validator(mode="after")
    def validate_spec_version(self) -> RunConfig:
        """Validate the schema version and that model commands have a model.

        Returns:
            The validated configuration.

        Raises:
            ValueError: For an unsupported version or a missing model.
        """
        if self.spec_version != SPEC_VERSION:
            msg: str = f"spec_version must be {SPEC_VERSION}, got {self.spec_version}"
            raise ValueError(msg)
        if self.command in {"hessian", "connection", "curvature", "verify"} and self.model is None:
            msg = f"Command {self.command!r} needs a [model] table"
            raise ValueError(msg)
        return self


def parse_config(text: str) -> RunConfig:
    """Validate a TOML document.

    Returns:
        The configuration.

    Raises:
        ConfigError: On TOML syntax or schema errors.
    """
    try:
        raw: dict[str, Any] = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        msg: str = f"Invalid TOML: {e}"
        raise ConfigError(msg) from e
    try:
        config: RunConfig = RunConfig.model_validate(raw)
    except ValidationError as e:
        msg = f"Invalid run configuration: {e}"
        raise ConfigError(msg) from e
    logger.debug("Loaded %s configuration", config.command)
    return config


def load_config(path: Path) -> tuple[RunConfig, bytes]:
    """Read and validate a configuration file.

    Returns:
        The configuration and the raw bytes (for the run digest).

    Raises:
        ConfigError: If the file cannot be read or validated.
    """
    try:
        data: bytes = path.read_bytes()
    except OSError as e:
        msg: str = f"Cannot read configuration {path}: {e}"
        raise ConfigError(msg) from e
    return parse_config(data.decode("utf-8")), data
