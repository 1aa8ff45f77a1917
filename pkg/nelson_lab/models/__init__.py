"""SQLAlchemy models of the run catalog."""

from models.run import ArtifactRecord, CriterionRecord, RunRecord

__all__ = ["RunRecord", "ArtifactRecord", "CriterionRecord"]
