from typing import Any

import pytest

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.eight import FansParams
from finsler_forge.ansatzgen.recipes import value_of
from finsler_forge.builders import SOL1_COORDINATES
from finsler_forge.builders import Compiler
from finsler_forge.builders import build_model
from finsler_forge.builders import fans_params
from finsler_forge.builders import model_coordinates
from finsler_forge.builders import perturbed
from finsler_forge.builders import soliton_params
from finsler_forge.config import ModelConfig
from finsler_forge.config import SolitonConfig
from finsler_forge.config import SourceConfig
from finsler_forge.exceptions import ConfigError
from finsler_forge.exceptions import InputError
from finsler_forge.jetcalc import ScalarField

SOL1_RECIPE: dict[str, Any] = {
    "psi": "0.1*sin(x1)*cos(x2)",
    "f": "exp(0.5*v)*(1 + 0.2*x1^2)",
    "w0": [0.1, 0.0],
    "n1": [0.2, 0.0],
}

INLINE: dict[str, Any] = {
    "kind": "inline",
    "coordinates": ["x1", "x2", "y"],
    "parameters": {"k": 0.5},
    "inline": {
        "n": 2,
        "g": [["1 + k*x1^2", 0.0], [0.0, 1.0]],
        "shells": [{"h": [[2.0]], "N": [["x2", 0.0]]}],
    },
}


def model(**table: Any) -> ModelConfig:  # noqa: ANN401
    return ModelConfig.model_validate(table)


def test_compiler_numbers_and_expressions() -> None:
    """Test that numbers stay constants and strings compile with parameters."""
    compile_ = Compiler(("x",), {"k": 2.0})
    assert compile_(3) == 3.0
    field = compile_("k*x")
    assert isinstance(field, ScalarField)
    assert jetcalc.primal(field([1.5])) == pytest.approx(3.0)
    assert compile_.pair([1, "x"])[0] == 1.0


def test_default_coordinates() -> None:
    """Test the per-kind default names and the length check."""
    assert model_coordinates(model(kind="sol1")) == SOL1_COORDINATES
    assert len(model_coordinates(model(kind="fans"))) == 8
    assert model_coordinates(model(**INLINE)) == ("x1", "x2", "y")
    with pytest.raises(ConfigError, match="has 4 coordinates"):
        model_coordinates(model(kind="sol1", coordinates=["a", "b", "c"]))


def test_build_sol1() -> None:
    """Test that a generated solution carries its source and the separated evaluator."""
    built = build_model(model(kind="sol1", nodes=17, recipe=SOL1_RECIPE), SourceConfig(upsilon4=-0.3))
    assert built.evaluator == "separated"
    assert built.coordinates == SOL1_COORDINATES
    assert built.metric.dim == 4
    assert built.source.upsilon4 == -0.3
    assert isinstance(built.source.upsilon2, ScalarField)
    assert built.finsler is None


def test_sol1_needs_recipe() -> None:
    """Test the missing-recipe error."""
    with pytest.raises(ConfigError, match=r"needs a \[model.recipe\] table"):
        build_model(model(kind="sol1"), SourceConfig())


def test_build_inline() -> None:
    """Test an entry-by-entry metric with a parameter."""
    built = build_model(model(**INLINE), SourceConfig())
    assert built.evaluator == "generic"
    blocks = built.metric.blocks([2.0, 0.3, 1.0])
    assert jetcalc.primal(blocks.g[0, 0]) == pytest.approx(3.0)
    assert jetcalc.primal(blocks.shells[0].N[0, 0]) == pytest.approx(0.3)


def test_inline_coordinate_count() -> None:
    """Test that the names must cover every coordinate of the inline metric."""
    with pytest.raises(ConfigError, match="Inline metric has 3 coordinates"):
        build_model(model(**{**INLINE, "coordinates": ["x1", "x2"]}), SourceConfig())


def test_build_finsler() -> None:
    """Test the Sasaki lift of a catalog element and its generated coordinate names."""
    table = {"generator": "bogoslovsky", "params": {"b": 0.2}}
    built = build_model(model(kind="finsler", finsler=table), SourceConfig())
    assert built.finsler is not None
    assert built.metric.dim == 8
    assert built.coordinates == tuple(f"u{k}" for k in range(8))
    assert built.metric.name.startswith("sasaki[")


def test_unknown_generator() -> None:
    """Test that catalog misses are input errors."""
    with pytest.raises(InputError, match="Unknown generating function"):
        build_model(model(kind="finsler", finsler={"generator": "kropina"}), SourceConfig())


def test_source_overlay_on_prime_metric() -> None:
    """Test that ``[source]`` entries replace only the named parts of the model's own source."""
    point = [0.5, 1.0, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5]
    own = build_model(model(kind="fans", fans={"ha": "1 + 0.1*t^2"}), SourceConfig())
    built = build_model(model(kind="fans", fans={"ha": "1 + 0.1*t^2"}), SourceConfig(upsilon2="-0.5*t"))
    assert built.evaluator == "eight"
    assert jetcalc.primal(value_of(built.source.upsilon2, point)) == pytest.approx(-0.25)
    assert jetcalc.primal(value_of(built.source.upsilon4, point)) == pytest.approx(
        jetcalc.primal(value_of(own.source.upsilon4, point)),
    )


def test_perturbed_scales_outermost_entry() -> None:
    """Test the relative perturbation of the last diagonal entry."""
    metric = build_model(model(**INLINE), SourceConfig()).metric
    point = [0.0, 0.0, 0.0]
    assert perturbed(metric, 0.5).blocks(point).shells[-1].h[0, 0] == pytest.approx(3.0)
    assert metric.blocks(point).shells[-1].h[0, 0] == pytest.approx(2.0)
    built = build_model(model(**{**INLINE, "perturb": 0.1}), SourceConfig())
    assert built.metric.name.endswith("(perturbed)")


def test_perturbed_selects_the_diagonal_entry() -> None:
    """Test that ``entry`` picks which diagonal entry of a two-dimensional shell is scaled."""
    table: dict[str, Any] = {
        "kind": "inline",
        "coordinates": ["x1", "x2", "y1", "y2"],
        "inline": {
            "n": 2,
            "g": [[1.0, 0.0], [0.0, 1.0]],
            "shells": [{"h": [[2.0, 0.0], [0.0, 3.0]], "N": [[0.0, 0.0], [0.0, 0.0]]}],
        },
    }
    metric = build_model(model(**table), SourceConfig()).metric
    point = [0.1, 0.2, 0.3, 0.4]
    first = perturbed(metric, 0.01, entry=0).blocks(point).shells[-1].h
    last = perturbed(metric, 0.01).blocks(point).shells[-1].h
    assert (first[0, 0], first[1, 1]) == (pytest.approx(2.02), pytest.approx(3.0))
    assert (last[0, 0], last[1, 1]) == (pytest.approx(2.0), pytest.approx(3.03))


def test_parameter_tables() -> None:
    """Test the soliton and prime-data conversions."""
    params = soliton_params(SolitonConfig(kappa=0.5, l=0.2, eps_sign=-1))
    assert (params.kappa, params.l, params.eps_sign) == (0.5, 0.2, -1)
    assert fans_params(None, {}) == FansParams()
