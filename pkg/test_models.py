import pytest

from models import ExperimentRun, RunStatus, TallyShard
from services.enumeration import LatinClass, prefixes, tally
from services.run_service import cached_tally, change_run_status, record_run, stored_shards


def new_run(db):
    run = ExperimentRun(command='enumerate', parameters={'n': 4}, version='1.0.0', status=RunStatus.PENDING)
    db.add(run)
    db.commit()
    return run


class TestRunLifecycle:
    def test_happy_path(self, db_session):
        run = new_run(db_session)
        change_run_status(db_session, run, RunStatus.RUNNING)
        change_run_status(db_session, run, 'COMPLETE')
        assert run.status == RunStatus.COMPLETE
        assert run.to_dict()['status'] == 'COMPLETE'

    def test_initial_status_must_be_pending(self):
        with pytest.raises(ValueError, match='PENDING'):
            ExperimentRun(command='verify', version='1.0.0', status=RunStatus.RUNNING)

    def test_cannot_skip_running(self, db_session):
        run = new_run(db_session)
        with pytest.raises(ValueError, match='Invalid status transition'):
            change_run_status(db_session, run, RunStatus.COMPLETE)

    def test_terminal_states_are_final(self, db_session):
        run = new_run(db_session)
        change_run_status(db_session, run, RunStatus.FAILED)
        with pytest.raises(ValueError):
            change_run_status(db_session, run, RunStatus.RUNNING)

    def test_unknown_status(self, db_session):
        run = new_run(db_session)
        with pytest.raises(ValueError, match='Unknown status'):
            change_run_status(db_session, run, 'PAUSED')


class TestRecordRun:
    def test_complete(self, db_session):
        with record_run(db_session, 'alon-tarsi', {'n': 4}) as handle:
            handle.result = {'difference': 4}
        run = db_session.query(ExperimentRun).one()
        assert run.status == RunStatus.COMPLETE
        assert run.result == {'difference': 4}
        assert run.exit_code == 0

    def test_failed(self, db_session):
        with pytest.raises(ValueError):
            with record_run(db_session, 'enumerate', {'n': 9}):
                raise ValueError('size guard: too big')
        run = db_session.query(ExperimentRun).one()
        assert run.status == RunStatus.FAILED
        assert run.exit_code == 2
        assert run.error_message == 'size guard: too big'

    def test_without_database(self):
        with record_run(None, 'verify', {}) as handle:
            handle.result = 1
        assert handle.id is None


class TestShards:
    def test_prefix_encoding(self):
        prefix = ((1, 2, 3), (2, 3, 1))
        assert TallyShard.decode_prefix(TallyShard.encode_prefix(prefix)) == prefix

    def test_cached_tally_resumes(self, db_session):
        expected = tally(5, LatinClass.REDUCED).counts
        first = cached_tally(db_session, 5, LatinClass.REDUCED)
        assert first.counts == expected
        shards = db_session.query(TallyShard).all()
        assert len(shards) == len(prefixes(5, LatinClass.REDUCED))

        # drop one shard: the next call recomputes only that one
        db_session.delete(shards[0])
        db_session.commit()
        assert len(stored_shards(db_session, 5, 'reduced')) == len(shards) - 1
        second = cached_tally(db_session, 5, LatinClass.REDUCED)
        assert second.counts == expected
        assert db_session.query(TallyShard).count() == len(shards)
