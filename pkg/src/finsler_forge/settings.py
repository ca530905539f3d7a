import logging
from typing import TYPE_CHECKING
from typing import Literal

from platformdirs import user_config_path
from platformdirs import user_data_path
from pydantic import AnyUrl
from pydantic import Field
from pydantic import model_validator
from pydantic_settings import BaseSettings
from pydantic_settings import SettingsConfigDict

if TYPE_CHECKING:
    from pathlib import Path

# Run ledger and other data that needs to persist between runs
DATA_DIR: Path = user_data_path(
    appname="finsler-forge",
    appauthor="TheLovinator",
    roaming=True,
    ensure_exists=True,
)

# Configuration directory - .env etc.
CONFIG_DIR: Path = user_config_path(
    appname="finsler-forge",
    appauthor="TheLovinator",
    roaming=True,
    ensure_exists=True,
)

DEFAULT_LEDGER_DB_PATH: Path = DATA_DIR / "runs.sqlite"
SQLITE_LEDGER_URL: AnyUrl = AnyUrl(url=f"sqlite:///{DEFAULT_LEDGER_DB_PATH}")

type LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]


class ForgeSettings(BaseSettings):
    """Process-wide settings.

    Loaded from FINSLER_FORGE_* environment variables and the .env file in the config directory.
    Values given in a run configuration or on the command line take precedence.
    """

    model_config = SettingsConfigDict(
        env_prefix="FINSLER_FORGE_",
        env_file=CONFIG_DIR / ".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Sweeps
    threads: int = Field(default=1, gt=0, description="Worker threads for point and trajectory sweeps")
    tolerance: float = Field(default=1e-6, gt=0, description="Residual tolerance used by the verify command")

    # Numerics
    spectral_nodes: int = Field(default=33, ge=9, description="Clenshaw-Curtis nodes for nested v-integrals")
    quad_tolerance: float = Field(default=1e-10, gt=0, description="Absolute tolerance of adaptive quadrature")

    log_level: LogLevel = Field(default="WARNING", description="Root logger level for the command line")

    # Run ledger
    ledger_enabled: bool = Field(default=False, description="Record every CLI run in the SQLite ledger")
    ledger_url: AnyUrl = Field(default=SQLITE_LEDGER_URL, description="Path to the SQLite run ledger")
    ledger_days: int = Field(default=365, gt=0, description="Maximum age of ledger records in days")

    @model_validator(mode="after")
    def validate_spectral_nodes(self) -> ForgeSettings:
        """Validate that the spectral rule has an odd node count.

        Returns:
            The validated settings instance.

        Raises:
            ValueError: If the node count is even.
        """
        if self.spectral_nodes % 2 == 0:
            msg: str = f"spectral_nodes must be odd, got {self.spectral_nodes}"
            raise ValueError(msg)
        return self

    @model_validator(mode="after")
    def validate_ledger_url(self) -> ForgeSettings:
        """Validate that the ledger lives in a SQLite database.

        Returns:
            The validated settings instance.

        Raises:
            ValueError: If the ledger URL is not a SQLite database.
        """
        if not str(self.ledger_url).startswith("sqlite:///"):
            msg: str = "Ledger URL must be a SQLite database (sqlite:///...)"
            raise ValueError(msg)
        return self

    def numeric_log_level(self) -> int:
        """Return the configured level as a logging constant."""
        return logging.getLevelNamesMapping()[self.log_level]
