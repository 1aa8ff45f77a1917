"""Run catalog models: one row per CLI run, its artifacts and acceptance criteria."""

from datetime import datetime
from sqlalchemy import Column, Integer, String, Text, DateTime, Float, Boolean, ForeignKey
from sqlalchemy.orm import relationship
from config import Base


class RunRecord(Base):
    """One invocation of a subcommand, mirroring its manifest."""

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(String(80), unique=True, index=True, nullable=False)
    subcommand = Column(String(32), index=True, nullable=False)
    scenario = Column(String(80))
    config_hash = Column(String(64), index=True, nullable=False)
    tool_version = Column(String(32), nullable=False)
    seed = Column(Integer)
    status = Column(String(16), default="running", nullable=False)
    wall_time = Column(Float)
    error = Column(Text)
    started_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime)

    # Relationships
    artifacts = relationship("ArtifactRecord", back_populates="run", cascade="all, delete-orphan")
    criteria = relationship("CriterionRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<RunRecord(id={self.id}, run_id='{self.run_id}', status='{self.status}')>"


class ArtifactRecord(Base):
    """A file written under a run directory."""

    __tablename__ = "artifacts"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False)
    path = Column(String(255), nullable=False)
    kind = Column(String(16), nullable=False)
    sha256 = Column(String(64), nullable=False)
    size = Column(Integer, nullable=False)

    run = relationship("RunRecord", back_populates="artifacts")

    def __repr__(self):
        return f"<ArtifactRecord(id={self.id}, path='{self.path}', kind='{self.kind}')>"


class CriterionRecord(Base):
    """Pass/fail outcome of one acceptance check inside a run."""

    __tablename__ = "criteria"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False)
    name = Column(String(80), nullable=False)
    value = Column(Float)
    threshold = Column(Float)
    passed = Column(Boolean, nullable=False)

    run = relationship("RunRecord", back_populates="criteria")

    def __repr__(self):
        return f"<CriterionRecord(name='{self.name}', value={self.value}, passed={self.passed})>"
