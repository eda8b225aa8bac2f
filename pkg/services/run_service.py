"""
Storing experiment runs and resumable enumeration shards
"""
import logging
from contextlib import contextmanager
from typing import Optional

from sqlalchemy.orm import Session

from config import VERSION
from models import ExperimentRun, RunStatus, TallyShard
from services.enumeration import ParityTally, check_size, iter_shard_counts

logger = logging.getLogger(__name__)


def change_run_status(db: Session, run: ExperimentRun, new_status) -> ExperimentRun:
    """Change `run.status` to `new_status` enforcing allowed transitions.

    - `new_status` can be a `RunStatus` or a string matching one.
    - Commits the change and returns the refreshed run.
    - Invalid transitions raise ValueError (enforced at model level).
    """
    if isinstance(new_status, RunStatus):
        status_val = new_status
    else:
        try:
            status_val = RunStatus(new_status)
        except Exception:
            raise ValueError(f"Unknown status: {new_status}")

    run.status = status_val
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


class RunHandle:
    """What a command hands back to record_run: the result and its exit code."""

    def __init__(self, run: Optional[ExperimentRun]):
        self.run = run
        self.result = None
        self.exit_code = 0

    @property
    def id(self) -> Optional[str]:
        return self.run.id if self.run is not None else None


@contextmanager
def record_run(db: Optional[Session], command: str, parameters: dict, seed: Optional[int] = None):
    """Track a command as an ExperimentRun; a no-op when db is None.

    PENDING on entry, RUNNING while the body executes, then COMPLETE (with
    handle.result and handle.exit_code) or FAILED if the body raised.
    """
    if db is None:
        yield RunHandle(None)
        return

    run = ExperimentRun(command=command, parameters=parameters, seed=seed,
                        version=VERSION, status=RunStatus.PENDING)
    db.add(run)
    db.commit()
    change_run_status(db, run, RunStatus.RUNNING)
    logger.info(f"run {run.id}: {command} started")
    handle = RunHandle(run)
    try:
        yield handle
    except Exception as e:
        db.rollback()
        db.refresh(run)
        run.error_message = str(e)[:500]
        run.exit_code = 2 if isinstance(e, ValueError) else 1
        change_run_status(db, run, RunStatus.FAILED)
        logger.warning(f"run {run.id}: {command} failed: {e}")
        raise
    run.result = handle.result
    run.exit_code = handle.exit_code
    change_run_status(db, run, RunStatus.COMPLETE)
    logger.info(f"run {run.id}: {command} complete (exit {handle.exit_code})")


def stored_shards(db: Session, n: int, klass) -> dict:
    klass = check_size(n, klass)
    rows = db.query(TallyShard).filter(TallyShard.n == n, TallyShard.latin_class == klass.value).all()
    return {TallyShard.decode_prefix(row.prefix): row.counts for row in rows}


def cached_tally(db: Session, n: int, klass, workers: int = 1) -> ParityTally:
    """tally(), reusing shards already in the store and saving new ones as they finish.

    An interrupted enumeration resumes from the shards it managed to commit.
    """
    klass = check_size(n, klass)
    done = stored_shards(db, n, klass)
    if done:
        logger.info(f"n={n} class={klass.value}: reusing {len(done)} stored shard(s)")
    result = ParityTally(n, klass.value)
    for counts in done.values():
        result.merge(counts)
    for prefix, counts in iter_shard_counts(n, klass, workers, skip=done.keys()):
        db.add(TallyShard(n=n, latin_class=klass.value,
                          prefix=TallyShard.encode_prefix(prefix), counts=counts))
        db.commit()
        result.merge(counts)
    return result
