"""Lab-wide configuration: output root, run catalog database, logging."""

import os
from pathlib import Path
from typing import Optional
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, declarative_base
from dotenv import load_dotenv

load_dotenv()

Base = declarative_base()

PACKAGE_DIR = Path(__file__).resolve().parent
DEFAULT_LOG_CONFIG = PACKAGE_DIR / "logging.ini"
TOOL_VERSION = "0.1.0"


class LabConfig:
    """Settings shared by every run, resolved from arguments or the environment."""

    def __init__(
        self,
        out_root: Optional[str] = None,
        catalog_url: Optional[str] = None,
        threads: Optional[int] = None,
    ):
        """Initialize lab configuration.

        Args:
            out_root: Output root directory. Falls back to NELSON_LAB_OUT, then ./out.
            catalog_url: SQLAlchemy URL of the run catalog. Falls back to
                NELSON_LAB_CATALOG_URL, then a SQLite file under the output root.
            threads: Worker threads for walker drift sampling. Falls back to
                NELSON_LAB_THREADS, then 1.
        """
        self.out_root = Path(out_root or os.getenv("NELSON_LAB_OUT", "out"))
        self.catalog_url = catalog_url or os.getenv(
            "NELSON_LAB_CATALOG_URL",
            f"sqlite:///{self.out_root / 'catalog.db'}"
        )
        self.threads = int(threads or os.getenv("NELSON_LAB_THREADS", "1"))
        self.log_config = Path(os.getenv("NELSON_LAB_LOG_CONFIG", str(DEFAULT_LOG_CONFIG)))

        self._engine = None
        self._session_factory = None

    @property
    def engine(self):
        """Catalog engine, created on first use so runs without a catalog never touch disk."""
        if self._engine is None:
            engine_kwargs = {}
            if self.catalog_url.startswith("sqlite"):
                engine_kwargs["connect_args"] = {"check_same_thread": False}
                if ":memory:" not in self.catalog_url:
                    self.out_root.mkdir(parents=True, exist_ok=True)
            self._engine = create_engine(self.catalog_url, **engine_kwargs)
        return self._engine

    @property
    def SessionLocal(self):
        if self._session_factory is None:
            self._session_factory = sessionmaker(
                autocommit=False,
                autoflush=False,
                bind=self.engine
            )
        return self._session_factory

    def get_session(self):
        """Get a new catalog session."""
        session = self.SessionLocal()
        try:
            yield session
        finally:
            session.close()

    def create_tables(self):
        """Create all catalog tables."""
        Base.metadata.create_all(bind=self.engine)

    def drop_tables(self):
        """Drop all catalog tables."""
        Base.metadata.drop_all(bind=self.engine)

    def run_dir(self, run_id: str) -> Path:
        """Directory holding every artifact of one run."""
        return self.out_root / run_id
