"""Data-parallel rollouts across independent environment lanes.

Lanes are partitioned into contiguous chunks across a worker pool; the
per-lane step is pure, so every partition yields bit-identical results
and worker count is a pure throughput knob. Policies are injected as
pure functions from (timestep batch, lane PRNG streams) to actions, so
the engine never embeds learning code.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as prng
from .env import BatchState, BatchTimestep, StepKind
from .environment import Environment


@dataclass
class RolloutSummary:
    """Per-lane episode statistics for one rollout."""

    episodes: np.ndarray     # (n,) completed episodes
    successes: np.ndarray    # (n,) episodes solved on submit
    reward_sum: np.ndarray   # (n,) float64
    steps_total: int

    @classmethod
    def concat(cls, parts: list["RolloutSummary"]) -> "RolloutSummary":
        return cls(
            episodes=np.concatenate([p.episodes for p in parts]),
            successes=np.concatenate([p.successes for p in parts]),
            reward_sum=np.concatenate([p.reward_sum for p in parts]),
            steps_total=sum(p.steps_total for p in parts),
        )


class RandomPolicy:
    """Uniform over the environment's wrapped action space."""

    def __init__(self, env: Environment):
        self._env = env

    def __call__(self, ts: BatchTimestep, keys: np.ndarray, counters: np.ndarray):
        actions, counters = self._env.sample_actions(keys, counters)
        return actions, counters


def batch_reset(env: Environment, seed: int, num_envs: int):
    """Reset num_envs lanes from one seed (one split per lane)."""
    keys, counters = prng.keys_from_seed(seed, num_envs)
    return env.batch_reset(keys, counters)


def batch_step(env: Environment, state: BatchState, actions, workers: int = 1):
    """One synchronous step across all lanes, optionally chunked."""
    if workers <= 1 or state.size == 1:
        return env.batch_step(state, actions)
    chunks = _chunk_bounds(state.size, workers)

    def run(bounds):
        lo, hi = bounds
        return env.batch_step(state.slice_lanes(slice(lo, hi)), _slice_actions(actions, lo, hi))

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(run, chunks))
    return _concat_states([p[0] for p in parts]), _concat_timesteps([p[1] for p in parts])


def rollout(
    env: Environment,
    state: BatchState,
    timestep: BatchTimestep,
    policy,
    steps: int,
    policy_keys: np.ndarray,
    policy_counters: np.ndarray,
    workers: int = 1,
    record: bool = False,
):
    """Run `steps` synchronous batch steps under an injected policy.

    Returns (state, timestep, summary[, records]): per-lane episode
    statistics with steps_total = lanes * steps, plus per-step
    trajectory records when record=True. Identical inputs give
    identical outputs for any worker count.
    """
    if workers <= 1 or state.size == 1:
        return _rollout_chunk(
            env, state, timestep, policy, steps, policy_keys, policy_counters,
            lane_offset=0, record=record,
        )
    chunks = _chunk_bounds(state.size, workers)

    def run(bounds):
        lo, hi = bounds
        return _rollout_chunk(
            env,
            state.slice_lanes(slice(lo, hi)),
            _slice_timestep(timestep, lo, hi),
            policy,
            steps,
            policy_keys[lo:hi],
            policy_counters[lo:hi],
            lane_offset=lo,
            record=record,
        )

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(run, chunks))
    state = _concat_states([p[0] for p in parts])
    timestep = _concat_timesteps([p[1] for p in parts])
    summary = RolloutSummary.concat([p[2] for p in parts])
    if not record:
        return state, timestep, summary
    records = [r for p in parts for r in p[3]]
    records.sort(key=lambda r: (r["step"], r["lane"]))
    return state, timestep, summary, records


def _rollout_chunk(
    env, state, timestep, policy, steps, keys, counters, lane_offset, record
):
    n = state.size
    episodes = np.zeros(n, dtype=np.int64)
    successes = np.zeros(n, dtype=np.int64)
    reward_sum = np.zeros(n, dtype=np.float64)
    records: list[dict] = []
    for step_i in range(steps):
        actions, counters = policy(timestep, keys, counters)
        state, timestep = env.batch_step(state, actions)
        last = timestep.step_kind == StepKind.LAST
        episodes += last
        successes += timestep.solved
        reward_sum += timestep.reward
        if record:
            described = env.adapter.describe(actions)
            for i in range(n):
                records.append({
                    "lane": lane_offset + i,
                    "step": step_i,
                    "op": described[i]["op"],
                    "selection": described[i]["selection"],
                    "reward": float(timestep.reward[i]),
                    "similarity": float(timestep.similarity[i]),
                    "step_kind": StepKind(int(timestep.step_kind[i])).name.lower(),
                })
    summary = RolloutSummary(
        episodes=episodes, successes=successes, reward_sum=reward_sum,
        steps_total=n * steps,
    )
    if record:
        return state, timestep, summary, records
    return state, timestep, summary


def _chunk_bounds(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n))
    base, extra = divmod(n, workers)
    bounds = []
    lo = 0
    for i in range(workers):
        hi = lo + base + (1 if i < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def _slice_actions(actions, lo, hi):
    if isinstance(actions, tuple):
        return tuple(a[lo:hi] for a in actions)
    return actions[lo:hi]


def _slice_timestep(ts: BatchTimestep, lo, hi) -> BatchTimestep:
    return BatchTimestep(
        observation=ts.observation[lo:hi],
        reward=ts.reward[lo:hi],
        step_kind=ts.step_kind[lo:hi],
        discount=ts.discount[lo:hi],
        similarity=ts.similarity[lo:hi],
        solved=ts.solved[lo:hi],
        applied=ts.applied[lo:hi],
    )


def _concat_states(parts: list[BatchState]) -> BatchState:
    from .env import _BATCH_FIELDS

    return BatchState(**{
        name: np.concatenate([getattr(p, name) for p in parts])
        for name in _BATCH_FIELDS
    })


def _concat_timesteps(parts: list[BatchTimestep]) -> BatchTimestep:
    return BatchTimestep(
        observation=np.concatenate([p.observation for p in parts]),
        reward=np.concatenate([p.reward for p in parts]),
        step_kind=np.concatenate([p.step_kind for p in parts]),
        discount=np.concatenate([p.discount for p in parts]),
        similarity=np.concatenate([p.similarity for p in parts]),
        solved=np.concatenate([p.solved for p in parts]),
        applied=np.concatenate([p.applied for p in parts]),
    )
