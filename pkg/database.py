"""
Database connection for stored experiment runs (SQLite by default)
"""
import logging

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, scoped_session, sessionmaker

from config import config

logger = logging.getLogger(__name__)

# Create scoped session factory; bound by init_db
SessionLocal = scoped_session(
    sessionmaker(
        autocommit=False,
        autoflush=False,
    )
)

# Create declarative base
Base = declarative_base()

engine = None


def _make_engine(url: str):
    if url.startswith('sqlite'):
        return create_engine(url, echo=False, connect_args={'check_same_thread': False})
    return create_engine(url, echo=False, pool_size=10, max_overflow=20, pool_pre_ping=True)


def get_db():
    """Get database session"""
    if engine is None:
        init_db()
    db = SessionLocal()
    try:
        yield db
        db.commit()
    except Exception as e:
        db.rollback()
        logger.error(f"Database error: {str(e)}")
        raise
    finally:
        db.close()


def init_db(url: str = None):
    """Bind the session factory to url (default LATIN_DATABASE_URL) and create tables"""
    global engine
    import models  # noqa: F401  registers the tables on Base

    url = url or config.DATABASE_URL
    if engine is not None:
        SessionLocal.remove()
        engine.dispose()
    engine = _make_engine(url)
    SessionLocal.configure(bind=engine)
    Base.metadata.create_all(bind=engine)
    logger.info(f"Database initialized at {url}")
    return engine
