"""Environment handle: params + buffer + wrapper stack behind one object.

The handle itself is immutable configuration; episode state is always
passed in and returned, matching the stateless core. Single-env and
batched entry points share the same kernels, so they agree bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import env as envcore
from . import rng as prng
from .env import BatchState, BatchTimestep, EnvParams, EnvState, Timestep
from .tasks import TaskBuffer
from .wrappers import MaskActions, splice_auto_reset


@dataclass(frozen=True)
class Environment:
    params: EnvParams
    buffer: TaskBuffer
    adapter: object = None
    channels: tuple[str, ...] = envcore.BASE_CHANNELS
    auto_reset: bool = False

    def __post_init__(self):
        if self.adapter is None:
            object.__setattr__(self, "adapter", MaskActions(self.params.profile))

    # Spaces

    def action_space(self) -> dict:
        return self.adapter.space()

    def observation_shape(self) -> tuple[int, int, int]:
        return (len(self.channels), *self.params.profile.shape)

    # Single environment

    def reset(self, rng: prng.PrngState) -> tuple[EnvState, Timestep]:
        return envcore.reset(rng, self.params, self.buffer, self.channels)

    def step(self, state: EnvState, action) -> tuple[EnvState, Timestep]:
        core = self.adapter.to_core(action)
        state, ts = envcore.step(
            state, core, self.params, self.buffer, self.channels
        )
        if self.auto_reset:
            from .wrappers import auto_reset as splice
            state, ts = splice(state, ts, self.params, self.buffer, self.channels)
        return state, ts

    # Batched lanes

    def batch_reset(
        self, keys: np.ndarray, counters: np.ndarray
    ) -> tuple[BatchState, BatchTimestep]:
        return envcore.reset_batch(keys, counters, self.params, self.buffer, self.channels)

    def batch_step(self, state: BatchState, actions) -> tuple[BatchState, BatchTimestep]:
        ops, sels = self.adapter.to_core_batch(actions)
        state, ts = envcore.step_batch(
            state, ops, sels, self.params, self.buffer, self.channels
        )
        if self.auto_reset:
            state, ts = splice_auto_reset(state, ts, self.params, self.buffer, self.channels)
        return state, ts

    def sample_actions(self, keys: np.ndarray, counters: np.ndarray):
        """One uniform action per lane from the wrapped action space."""
        return self.adapter.sample_batch(keys, counters)

    def with_params(self, params: EnvParams) -> "Environment":
        return Environment(
            params=params,
            buffer=self.buffer,
            adapter=self.adapter,
            channels=self.channels,
            auto_reset=self.auto_reset,
        )
