import pytest

from services.latin_square import LatinSquare, validate


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run slow tests')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full enumerations and long sampler runs')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def order_two():
    return validate([[1, 2], [2, 1]])


@pytest.fixture
def cyclic_three():
    return LatinSquare.cyclic(3)


@pytest.fixture
def switchable_five():
    """Reduced; rows 4 and 5 have cycles on columns {1, 2} and {3, 4, 5}."""
    return validate([
        [1, 2, 3, 4, 5],
        [2, 3, 5, 1, 4],
        [3, 1, 4, 5, 2],
        [4, 5, 1, 2, 3],
        [5, 4, 2, 3, 1],
    ])


@pytest.fixture
def switched_five():
    """switchable_five after switching rows 4 and 5 on columns 3, 4, 5."""
    return validate([
        [1, 2, 3, 4, 5],
        [2, 3, 5, 1, 4],
        [3, 1, 4, 5, 2],
        [4, 5, 2, 3, 1],
        [5, 4, 1, 2, 3],
    ])


@pytest.fixture
def db_session(tmp_path):
    from database import SessionLocal, init_db

    init_db(f"sqlite:///{tmp_path / 'runs.db'}")
    db = SessionLocal()
    yield db
    db.close()
    SessionLocal.remove()
