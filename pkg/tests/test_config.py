from typing import TYPE_CHECKING

import pytest
from pydantic import ValidationError

from finsler_forge.config import ClassifyConfig
from finsler_forge.config import PointsConfig
from finsler_forge.config import load_config
from finsler_forge.config import parse_config
from finsler_forge.exceptions import ConfigError
from finsler_forge.settings import ForgeSettings

if TYPE_CHECKING:
    from pathlib import Path

VERIFY_DOCUMENT: str = """
spec_version = 1
command = "verify"
tolerance = 1e-7

[model]
kind = "fans"

[model.fans]
ha = "1 + 0.1*t^2"

[source]
upsilon2 = -0.5

[points]
explicit = [[0.5, 1.0, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5]]
"""


def test_parse_valid_document() -> None:
    """Test that tables and defaults come through."""
    config = parse_config(VERIFY_DOCUMENT)
    assert config.command == "verify"
    assert config.tolerance == 1e-7
    assert config.threads is None
    assert config.model is not None
    assert config.model.kind == "fans"
    assert config.model.fans is not None
    assert config.model.fans.ha == "1 + 0.1*t^2"
    assert config.model.fans.va == 1.0
    assert config.source.upsilon2 == -0.5
    assert config.source.upsilon4 is None


def test_invalid_toml() -> None:
    """Test that syntax errors become configuration errors."""
    with pytest.raises(ConfigError, match="Invalid TOML"):
        parse_config("command = ")


@pytest.mark.parametrize(
    ("document", "fragment"),
    [
        ('spec_version = 2\ncommand = "soliton"', "spec_version must be 1"),
        ('spec_version = 1\ncommand = "verify"', "needs a \\[model\\] table"),
        ('spec_version = 1\ncommand = "plot"', "Invalid run configuration"),
        ('spec_version = 1\ncommand = "soliton"\nthreads = 0', "Invalid run configuration"),
        ('spec_version = 1\ncommand = "soliton"\ncolour = "red"', "Invalid run configuration"),
        ('spec_version = 1\ncommand = "hessian"\n[model]\nkind = "finsler"', "needs a \\[model.finsler\\] table"),
        ('spec_version = 1\ncommand = "verify"\n[model]\nkind = "inline"', "needs a \\[model.inline\\] table"),
        (
            'spec_version = 1\ncommand = "verify"\n[model]\nkind = "three_shell"\n[[model.shells]]\n[[model.shells]]',
            "three \\[\\[model.shells\\]\\] tables, got 2",
        ),
    ],
)
def test_schema_errors(document: str, fragment: str) -> None:
    """Test the version, command and model-table checks."""
    with pytest.raises(ConfigError, match=fragment):
        parse_config(document)


def test_model_free_commands_need_no_model() -> None:
    """Test that the cosmological and soliton commands run on their own tables."""
    config = parse_config('spec_version = 1\ncommand = "cosmo-classify"\n[classify]\ngammas = [0.5, 3.0]')
    assert config.model is None
    assert config.classify.values() == [0.5, 3.0]


def test_explicit_points() -> None:
    """Test explicit coordinates and their dimension check."""
    points = PointsConfig(explicit=[[1, 2], [3, 4]])
    assert points.sample(2) == [(1.0, 2.0), (3.0, 4.0)]
    with pytest.raises(ConfigError, match="must have 3 coordinates"):
        points.sample(3)


def test_halton_points_fill_the_box() -> None:
    """Test that sampled points lie in the box and repeat for one seed."""
    points = PointsConfig(count=5, low=[0.0, 1.0], high=[1.0, 3.0], seed=4)
    sample = points.sample(2)
    assert len(sample) == 5
    assert all(0.0 <= x <= 1.0 and 1.0 <= y <= 3.0 for x, y in sample)
    assert sample == points.sample(2)


def test_points_need_a_box() -> None:
    """Test the error when neither points nor matching corners are given."""
    with pytest.raises(ConfigError, match="low/high corners with 2 entries"):
        PointsConfig().sample(2)
    with pytest.raises(ConfigError, match="low/high corners with 3 entries"):
        PointsConfig(low=[0.0, 0.0], high=[1.0, 1.0]).sample(3)


def test_classify_range() -> None:
    """Test evenly spaced initial fractions."""
    assert ClassifyConfig(start=-1.0, stop=1.0, count=5).values() == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_load_config(tmp_path: Path) -> None:
    """Test that the raw bytes come back with the configuration."""
    path = tmp_path / "run.toml"
    path.write_text(VERIFY_DOCUMENT, encoding="utf-8")
    config, data = load_config(path)
    assert config.command == "verify"
    assert data == VERIFY_DOCUMENT.encode()


def test_load_missing_config(tmp_path: Path) -> None:
    """Test that an unreadable file is a configuration error."""
    with pytest.raises(ConfigError, match="Cannot read configuration"):
        load_config(tmp_path / "missing.toml")


def test_settings_from_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test the environment prefix and the log level mapping."""
    monkeypatch.setenv("FINSLER_FORGE_THREADS", "6")
    monkeypatch.setenv("FINSLER_FORGE_LOG_LEVEL", "DEBUG")
    settings = ForgeSettings()
    assert settings.threads == 6
    assert settings.numeric_log_level() == 10


@pytest.mark.parametrize(
    ("values", "fragment"),
    [
        ({"spectral_nodes": 32}, "must be odd"),
        ({"spectral_nodes": 7}, "greater than or equal to 9"),
        ({"threads": 0}, "greater than 0"),
        ({"ledger_url": "postgresql://localhost/runs"}, "SQLite"),
    ],
)
def test_settings_validation(values: dict[str, object], fragment: str) -> None:
    """Test the node count, thread count and ledger checks."""
    with pytest.raises(ValidationError, match=fragment):
        ForgeSettings(**values)  # type: ignore[arg-type]
