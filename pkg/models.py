"""
Database models for latin-parity.

`ExperimentRun` records one stored command run, `TallyShard` one finished
enumeration shard.
"""
import enum
import json
import uuid

from sqlalchemy import (
    JSON,
    Column,
    DateTime,
    Enum as SQLEnum,
    Index,
    Integer,
    String,
    UniqueConstraint,
    event,
)
from sqlalchemy.orm import validates
from sqlalchemy.orm.base import NO_VALUE
from sqlalchemy.sql import func

from database import Base


class RunStatus(str, enum.Enum):
    PENDING = 'PENDING'
    RUNNING = 'RUNNING'
    COMPLETE = 'COMPLETE'
    FAILED = 'FAILED'


class ExperimentRun(Base):
    """One stored CLI run.

    Fields:
    - id: UUID string (primary key)
    - command: CLI command name ('enumerate', 'stats', ...)
    - parameters: JSON of the resolved flags
    - seed: master seed (nullable for deterministic commands)
    - version: package version that produced the run
    - status: ENUM, lifecycle enforced below
    - result: JSON payload of the output
    - exit_code, error_message: how the run ended
    - created_at, updated_at: timestamps
    """

    __tablename__ = 'experiment_runs'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    command = Column(String(50), nullable=False, index=True)
    parameters = Column(JSON, nullable=False, default=dict)
    seed = Column(Integer, nullable=True)
    version = Column(String(20), nullable=False)
    status = Column(SQLEnum(RunStatus, validate_strings=True), nullable=False)
    result = Column(JSON, nullable=True)
    exit_code = Column(Integer, nullable=True)
    error_message = Column(String(500), nullable=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)
    updated_at = Column(DateTime(timezone=True), server_default=func.now(), onupdate=func.now(), nullable=False)

    __table_args__ = (
        Index('ix_experiment_runs_command_status', 'command', 'status'),
    )

    @validates('status')
    def validate_status(self, key, value):
        """Ensure status is a valid RunStatus value."""
        if value is None:
            raise ValueError('status cannot be None')
        if isinstance(value, RunStatus):
            return value
        try:
            return RunStatus(value)
        except ValueError:
            raise ValueError(f'Invalid status: {value}. Must be one of {[s.value for s in RunStatus]}')

    def to_dict(self):
        return {
            'id': self.id,
            'command': self.command,
            'parameters': self.parameters,
            'seed': self.seed,
            'version': self.version,
            'status': self.status.value if self.status else None,
            'result': self.result,
            'exit_code': self.exit_code,
            'error_message': self.error_message,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'updated_at': self.updated_at.isoformat() if self.updated_at else None,
        }

    def __repr__(self):
        return f"<ExperimentRun {self.id} {self.command} {self.status.value if self.status else None}>"


# Allowed lifecycle transitions
_ALLOWED_STATUS_TRANSITIONS = {
    RunStatus.PENDING.value: {RunStatus.RUNNING.value, RunStatus.FAILED.value},
    RunStatus.RUNNING.value: {RunStatus.COMPLETE.value, RunStatus.FAILED.value},
    RunStatus.COMPLETE.value: set(),
    RunStatus.FAILED.value: set(),
}


@event.listens_for(ExperimentRun.status, 'set', retval=True, active_history=True)
def _validate_status_transition(target, value, oldvalue, initiator):
    """Reject status changes outside `_ALLOWED_STATUS_TRANSITIONS`.

    The first assignment must be PENDING; re-assigning the same value is a
    no-op.
    """
    new = value.value if isinstance(value, RunStatus) else value

    if new not in {s.value for s in RunStatus}:
        raise ValueError(f"Invalid status value: {new}")

    if oldvalue is NO_VALUE or oldvalue is None:
        if new != RunStatus.PENDING.value:
            raise ValueError("Initial status must be 'PENDING'")
        return value

    old = oldvalue.value if isinstance(oldvalue, RunStatus) else oldvalue
    if old == new:
        return value

    allowed = _ALLOWED_STATUS_TRANSITIONS.get(old)
    if allowed is None:
        raise ValueError(f"Unknown current status: {old}")

    if new not in allowed:
        raise ValueError(f"Invalid status transition: {old} -> {new}")

    return value


class TallyShard(Base):
    """Parity counts of one enumeration shard (the first two rows fixed)."""

    __tablename__ = 'tally_shards'

    id = Column(Integer, primary_key=True, autoincrement=True)
    n = Column(Integer, nullable=False)
    latin_class = Column(String(30), nullable=False)
    prefix = Column(String(200), nullable=False)
    counts = Column(JSON, nullable=False)
    created_at = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)

    __table_args__ = (
        UniqueConstraint('n', 'latin_class', 'prefix', name='uq_tally_shards_n_class_prefix'),
    )

    @staticmethod
    def encode_prefix(prefix) -> str:
        return json.dumps([list(row) for row in prefix], separators=(',', ':'))

    @staticmethod
    def decode_prefix(text: str):
        return tuple(tuple(row) for row in json.loads(text))

    def to_dict(self):
        return {
            'n': self.n,
            'class': self.latin_class,
            'prefix': self.decode_prefix(self.prefix),
            'counts': self.counts,
        }
