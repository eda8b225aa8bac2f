"""
Configuration module for latin-parity
Values come from the environment (or a local .env file)
"""
import math
import os
import sys

from dotenv import load_dotenv

load_dotenv()

VERSION = '1.0.0'

_LOG_BASES = {'e': math.e, '2': 2.0, '10': 10.0}


def parse_log_base(value) -> float:
    """Turn 'e', '2', '10' or any float string into a logarithm base."""
    if isinstance(value, (int, float)):
        base = float(value)
    else:
        text = str(value).strip().lower()
        base = _LOG_BASES[text] if text in _LOG_BASES else float(text)
    if base <= 1:
        raise ValueError(f'log base must be greater than 1, got {value}')
    return base


def _env_bool(name: str, default: str = 'false') -> bool:
    return os.getenv(name, default).lower() in ('1', 'true', 'yes')


class Config:
    """Base configuration"""
    VERSION = VERSION

    BASE_DIR = os.path.dirname(os.path.abspath(__file__))
    DATABASE_URL = os.getenv(
        'LATIN_DATABASE_URL', f'sqlite:///{os.path.join(BASE_DIR, "latin_parity.db")}'
    )
    STORE_RESULTS = _env_bool('LATIN_STORE_RESULTS')

    # Experiment defaults
    DEFAULT_SEED = os.getenv('LATIN_SEED', '0')
    WORKERS = os.getenv('LATIN_WORKERS', '1')
    LOG_BASE = os.getenv('LATIN_LOG_BASE', 'e')

    LOG_LEVEL = os.getenv('LATIN_LOG_LEVEL', 'WARNING').upper()
    DEBUG = _env_bool('FLASK_DEBUG')

    PYTHON_VERSION = f"{sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}"

    @property
    def seed(self) -> int:
        return int(self.DEFAULT_SEED)

    @property
    def workers(self) -> int:
        return int(self.WORKERS)

    @property
    def log_base(self) -> float:
        return parse_log_base(self.LOG_BASE)

    def debug_info(self) -> dict:
        """Resolved settings, for the startup log"""
        return {
            'version': self.VERSION,
            'python_version': self.PYTHON_VERSION,
            'database_url': self.DATABASE_URL,
            'store_results': self.STORE_RESULTS,
            'seed': self.DEFAULT_SEED,
            'workers': self.WORKERS,
            'log_base': self.LOG_BASE,
            'log_level': self.LOG_LEVEL,
        }

    def validate_config(self) -> bool:
        """Validate the experiment settings, naming every bad key"""
        problems = []
        try:
            self.seed
        except ValueError:
            problems.append(f'LATIN_SEED={self.DEFAULT_SEED!r} is not an integer')
        try:
            if self.workers < 1:
                problems.append(f'LATIN_WORKERS must be at least 1, got {self.WORKERS}')
        except ValueError:
            problems.append(f'LATIN_WORKERS={self.WORKERS!r} is not an integer')
        try:
            self.log_base
        except (KeyError, ValueError):
            problems.append(f'LATIN_LOG_BASE={self.LOG_BASE!r} is not a valid logarithm base')

        if problems:
            raise ValueError(f"Invalid configuration: {'; '.join(problems)}")
        return True


# Create configuration instance
config = Config()
