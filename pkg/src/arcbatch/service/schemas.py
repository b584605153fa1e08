"""Pydantic request/response models for the HTTP service.

Observations travel as nested integer lists shaped (channels, rows,
cols); rewards and similarities as JSON numbers (shortest round-trip,
so clients recover the exact float64 bits).
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field, model_validator


class MakeRequest(BaseModel):
    config: dict | None = None
    identifier: str | None = None
    dataset_root: str | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.config is None) == (self.identifier is None):
            raise ValueError("provide exactly one of config or identifier")
        return self


class MakeResponse(BaseModel):
    env_id: str
    action_space: dict
    observation_shape: list[int]
    num_tasks: int
    task_ids: list[str]


class MaskActionPayload(BaseModel):
    op: int
    selection: list[list[int]]


class ResetRequest(BaseModel):
    seed: int = 0


class StepRequest(BaseModel):
    # point: [row, col, op]; bbox: [r1, c1, r2, c2, op]; flat: int;
    # mask: {"op": ..., "selection": [[...]]}
    action: int | list[int] | MaskActionPayload


class TimestepPayload(BaseModel):
    observation: list
    reward: float
    step_kind: str
    discount: float
    info: dict[str, Any]


class BatchResetRequest(BaseModel):
    seed: int = 0
    num_envs: int = Field(ge=1)


class BatchStepRequest(BaseModel):
    actions: list[int | list[int] | MaskActionPayload]


class BatchTimestepPayload(BaseModel):
    observations: list
    rewards: list[float]
    step_kinds: list[str]
    discounts: list[float]
    similarities: list[float]
    solved: list[bool]
    applied: list[bool]


class RolloutRequest(BaseModel):
    steps: int = Field(ge=0)
    lanes: int = Field(default=1, ge=1)
    seed: int = 0
    policy: str = "random"
    workers: int = Field(default=1, ge=1)
    record: bool = False


class RolloutResponse(BaseModel):
    steps_total: int
    episodes: list[int]
    successes: list[int]
    reward_sums: list[float]
    records: list[dict] | None = None


class BenchRequest(BaseModel):
    config: dict | None = None
    identifier: str | None = None
    dataset_root: str | None = None
    batch_sizes: list[int] | None = None
    steps_per_env: int | None = None
    repeats: int | None = None
    seed: int | None = None


class BenchRecordPayload(BaseModel):
    batch_size: int
    steps_total: int
    best_seconds: float | None
    mean_seconds: float | None
    throughput_sps: float | None
    warmup_seconds: float | None
    skipped_reason: str | None


class ValidateRequest(BaseModel):
    path: str
    profile: str = "full"


class ValidateResponse(BaseModel):
    ok: bool
    files: int
    errors: list[str]


class RenderRequest(BaseModel):
    data: str
    task: str
    mode: str = "complete_task"
    cell_px: int = 20


class RenderResponse(BaseModel):
    svg: str
