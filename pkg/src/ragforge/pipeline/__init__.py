"""Staged, resumable pipeline over a workspace directory."""
from .stages import CELLS, Pipeline, Stage, StageResult, run_stage
from .stamps import hash_file, is_current, stage_digest, write_stamp
from .workspace import Workspace

__all__ = [
    "CELLS", "Pipeline", "Stage", "StageResult", "run_stage",
    "hash_file", "is_current", "stage_digest", "write_stamp",
    "Workspace",
]
