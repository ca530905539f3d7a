import datetime
import hashlib
import json
import logging
from typing import TYPE_CHECKING

from pydantic import BaseModel
from sqlmodel import Field
from sqlmodel import Session
from sqlmodel import SQLModel
from sqlmodel import create_engine
from sqlmodel import select

if TYPE_CHECKING:
    from collections.abc import Sequence

    from sqlalchemy import Engine
    from sqlmodel.sql.expression import SelectOfScalar

    from finsler_forge.settings import ForgeSettings

logger: logging.Logger = logging.getLogger(__name__)


class RunRecord(SQLModel, table=True):
    """One command-line run, keyed by the digest of its configuration document."""

    id: int | None = Field(default=None, primary_key=True, description="Primary key.")

    created_at: datetime.datetime = Field(
        default_factory=lambda: datetime.datetime.now(datetime.UTC),
        description="Timestamp of the first run of this configuration. Stored in UTC.",
    )
    updated_at: datetime.datetime = Field(
        default_factory=lambda: datetime.datetime.now(datetime.UTC),
        description="Timestamp of the latest run of this configuration. Stored in UTC.",
    )

    command: str = Field(index=True, description="The command that was run.")
    config_digest: str = Field(index=True, unique=True, description="sha256 of the configuration bytes.")
    exit_code: int = Field(description="Exit status of the latest run.")
    max_residual: float | None = Field(default=None, description="Largest residual reported, if any.")
    runs: int = Field(default=1, description="How many times this configuration was run.")

    outputs_json: str = Field(
        default="[]",
        description="JSON-encoded list of output file paths.",
    )

    @property
    def outputs(self) -> list[str]:
        """Get the output paths of the latest run."""
        return list(json.loads(self.outputs_json))

    @outputs.setter
    def outputs(self, value: list[str]) -> None:
        """Set the output paths of the latest run."""
        self.outputs_json = json.dumps(value)


class RunOutcome(BaseModel):
    """What a finished run reports to the ledger."""

    command: str
    config_bytes: bytes
    exit_code: int
    max_residual: float | None = None
    outputs: list[str] = []

    @property
    def digest(self) -> str:
        """sha256 hex digest of the configuration document."""
        return hashlib.sha256(self.config_bytes).hexdigest()


def ledger_engine(settings: ForgeSettings) -> Engine:
    """Open the ledger database and create its table if needed.

    Args:
        settings: Settings holding the ledger URL.

    Returns:
        The engine.
    """
    engine: Engine = create_engine(str(settings.ledger_url), echo=False)
    SQLModel.metadata.create_all(engine)
    return engine


def remove_expired_runs(session: Session, settings: ForgeSettings) -> None:
    """Delete records not updated within the retention window.

    Args:
        session: Database session to use.
        settings: Settings holding ``ledger_days``.
    """
    cutoff_date: datetime.datetime = datetime.datetime.now(datetime.UTC) - datetime.timedelta(
        days=settings.ledger_days,
    )

    statement: SelectOfScalar[RunRecord] = select(RunRecord).where(RunRecord.updated_at < cutoff_date)
    old_records: Sequence[RunRecord] = session.exec(statement).all()

    for record in old_records:
        session.delete(record)
    if old_records:
        logger.info("Pruned %d ledger records older than %d days", len(old_records), settings.ledger_days)

    session.commit()


def save_or_update_run(outcome: RunOutcome, now: datetime.datetime, session: Session) -> RunRecord:
    """Insert a record for a new configuration or refresh the one already stored.

    Args:
        outcome: The finished run.
        now: Current timestamp.
        session: Database session to use.

    Returns:
        The stored record.
    """
    digest: str = outcome.digest
    statement: SelectOfScalar[RunRecord] = select(RunRecord).where(RunRecord.config_digest == digest)
    record: RunRecord | None = session.exec(statement).first()

    if record:
        record.exit_code = outcome.exit_code
        record.max_residual = outcome.max_residual
        record.runs += 1
        record.updated_at = now
    else:
        record = RunRecord(
            command=outcome.command,
            config_digest=digest,
            exit_code=outcome.exit_code,
            max_residual=outcome.max_residual,
            created_at=now,
            updated_at=now,
        )
    record.outputs = outcome.outputs
    session.add(record)
    session.commit()
    session.refresh(record)
    return record


def record_run(outcome: RunOutcome, engine: Engine, settings: ForgeSettings) -> RunRecord:
    """Record a finished run and prune expired records.

    Args:
        outcome: The finished run.
        engine: Database engine to use.
        settings: Settings holding the retention window.

    Returns:
        The stored record.
    """
    now: datetime.datetime = datetime.datetime.now(datetime.UTC)

    with Session(engine) as session:
        record: RunRecord = save_or_update_run(outcome=outcome, now=now, session=session)
        remove_expired_runs(session=session, settings=settings)
        logger.debug("Recorded %s run %s (exit %d)", outcome.command, outcome.digest[:12], outcome.exit_code)
        return record


def recent_runs(engine: Engine, command: str | None = None, limit: int = 10) -> list[RunRecord]:
    """Get the most recently updated runs.

    Args:
        engine: Database engine to use.
        command: Only runs of this command when given.
        limit: Maximum number of results to return.

    Returns:
        Records ordered newest first.
    """
    with Session(engine) as session:
        statement: SelectOfScalar[RunRecord] = select(RunRecord)
        if command:
            statement = statement.where(RunRecord.command == command)
        records: Sequence[RunRecord] = session.exec(statement).all()
        return sorted(records, key=lambda r: r.updated_at, reverse=True)[:limit]
