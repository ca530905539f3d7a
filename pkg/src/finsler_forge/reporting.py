"""CSV tables written by the command line, one fixed schema per table."""

import csv
import logging
import math
from typing import TYPE_CHECKING

from pydantic import BaseModel
from pydantic import ConfigDict

from finsler_forge.exceptions import InputError

if TYPE_CHECKING:
    from collections.abc import Iterable
    from collections.abc import Mapping
    from collections.abc import Sequence
    from pathlib import Path

logger: logging.Logger = logging.getLogger(__name__)

type Cell = float | int | str | bool | None

SCHEMAS: dict[str, tuple[str, ...]] = {
    "hessian": ("point", "a", "b", "g_ab"),
    "connection": ("point", "family", "upper", "lower", "direction", "value"),
    "curvature": ("point", "block", "i", "j", "value"),
    "verify": ("samples", "worst_equation", "max_residual", "tolerance", "passed"),
    "residuals": ("equation", "max_residual", "argmax"),
    "cosmo-evolve": ("t", "hH", "vH", "gamma", "ha", "va", "rho", "accel_flag"),
    "cosmo-classify": ("gamma0", "label", "literal_label"),
    "soliton": ("kappa", "l", "eps_sign", "omega", "residual", "crest", "gamma", "gamma_tilde", "regime_flip"),
}


class ReportRow(BaseModel):
    """One record of a CSV table, keyed by column name."""

    model_config = ConfigDict(frozen=True)

    values: dict[str, Cell]

    @classmethod
    def of(cls, schema: Sequence[str], cells: Sequence[Cell]) -> ReportRow:
        """Pair cells with column names.

        Returns:
            The row.

        Raises:
            InputError: If the cell count does not match the schema.
        """
        if len(cells) != len(schema):
            msg: str = f"Row has {len(cells)} cells, schema {tuple(schema)} has {len(schema)} columns"
            raise InputError(msg)
        return cls(values=dict(zip(schema, cells, strict=True)))


def format_cell(value: Cell) -> str:
    """Render a cell: floats with 17 significant digits, booleans as 0/1, None as empty.

    Returns:
        The text.
    """
    match value:
        case None:
            return ""
        case bool():
            return "1" if value else "0"
        case int():
            return str(value)
        case float():
            if math.isnan(value):
                return "nan"
            if math.isinf(value):
                return "inf" if value > 0 else "-inf"
            return format(value, ".17g")
        case _:
            return str(value)


def format_point(point: Sequence[float]) -> str:
    """Join coordinates into one cell.

    Returns:
        ``;``-separated coordinates.
    """
    return ";".join(format_cell(float(p)) for p in point)


def export_csv(rows: Iterable[ReportRow], schema: Sequence[str], path: Path) -> Path:
    """Write rows as UTF-8 CSV with a header line and LF line endings.

    Args:
        rows: The records.
        schema: Column names in output order.
        path: Destination file; parent directories are created.

    Returns:
        The path written.

    Raises:
        InputError: If a row's columns differ from the schema.
    """
    columns: tuple[str, ...] = tuple(schema)
    path.parent.mkdir(parents=True, exist_ok=True)
    count: int = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if tuple(row.values) != columns:
                msg: str = f"Row columns {tuple(row.values)} do not match schema {columns}"
                raise InputError(msg)
            writer.writerow([format_cell(row.values[c]) for c in columns])
            count += 1
    logger.info("Wrote %d rows to %s", count, path)
    return path


def read_csv(path: Path) -> list[Mapping[str, str]]:
    """Read a table written by ``export_csv``.

    Returns:
        One mapping per data line, values as written.
    """
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))
