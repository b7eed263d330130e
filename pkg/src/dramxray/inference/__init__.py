"""Reverse-engineering engine. Talks to a chip only through ``dramxray.port``."""

from .pipeline import STAGES, StageError, resolve_stages, run_pipeline

__all__ = ["STAGES", "StageError", "resolve_stages", "run_pipeline"]
