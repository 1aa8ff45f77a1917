"""Shared pytest fixtures: small grids, reference Hamiltonians and a throwaway run catalog."""

import numpy as np
import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from config import Base, LabConfig
from lattice import Grid
from propagator import Hamiltonian, Particle
from propagator.potentials import harmonic


@pytest.fixture
def line_grid():
    """1D periodic line wide enough for a unit Gaussian to spread until t=1."""
    return Grid.uniform(1, 256, (-16.0, 16.0), periodic=True)


@pytest.fixture
def trap_grid():
    return Grid.uniform(1, 128, (-10.0, 10.0), periodic=True)


@pytest.fixture
def plane_grid():
    """2D periodic grid for single-particle vortex states."""
    return Grid.uniform(2, 128, (-8.0, 8.0), periodic=True)


@pytest.fixture
def pair_grid():
    """Two 1D particles sharing the same axis extent."""
    return Grid.uniform(2, 96, (-12.0, 12.0), periodic=True)


@pytest.fixture
def free_hamiltonian(line_grid):
    return Hamiltonian(line_grid, (Particle(),))


@pytest.fixture
def harmonic_hamiltonian(trap_grid):
    return Hamiltonian(trap_grid, (Particle(),), external=harmonic(trap_grid, 1.0, 1.0))


@pytest.fixture
def plane_trap(plane_grid):
    return Hamiltonian(plane_grid, (Particle(axes=(0, 1)),), external=harmonic(plane_grid, 1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="function")
def db_engine():
    """In-memory SQLite engine for catalog tests."""
    engine = create_engine("sqlite:///:memory:", connect_args={"check_same_thread": False})
    yield engine
    engine.dispose()


@pytest.fixture(scope="function")
def db_session(db_engine):
    """Create a catalog session with fresh tables."""
    # Create all tables
    Base.metadata.create_all(bind=db_engine)

    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=db_engine)
    session = SessionLocal()

    yield session

    # Cleanup
    session.close()
    Base.metadata.drop_all(bind=db_engine)


@pytest.fixture
def lab_config(tmp_path):
    """Lab configuration rooted in a temporary directory."""
    return LabConfig(out_root=str(tmp_path / "out"), catalog_url=f"sqlite:///{tmp_path / 'catalog.db'}")
