"""Deterministic batch-vectorized environments for ARC-style grid puzzles."""

from .env import (
    Action,
    BatchState,
    BatchTimestep,
    EnvParams,
    EnvState,
    RewardConfig,
    StepKind,
    Timestep,
    compute_reward,
    reset,
    step,
)
from .environment import Environment
from .factory import make
from .grids import FULL, MINI, GridProfile, PaddedGrid, pad_into_buffer, similarity
from .rng import PrngState, from_seed, split
from .tasks import (
    DatasetSpec,
    RawTask,
    TaskBuffer,
    build_task_buffer,
    load_dataset,
    sample_task,
)

__version__ = "0.1.0"

__all__ = [
    "Action", "BatchState", "BatchTimestep", "DatasetSpec", "EnvParams",
    "EnvState", "Environment", "FULL", "GridProfile", "MINI", "PaddedGrid",
    "PrngState", "RawTask", "RewardConfig", "StepKind", "TaskBuffer",
    "Timestep", "build_task_buffer", "compute_reward", "from_seed",
    "load_dataset", "make", "pad_into_buffer", "reset", "sample_task",
    "similarity", "split", "step",
]
