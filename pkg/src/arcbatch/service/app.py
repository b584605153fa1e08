"""HTTP service wrapping the engine for remote and cross-language clients.

Sessions hold environment handles plus the current episode (or lane
batch) state server-side; the wire carries seeds, actions and
timesteps. Rollouts and benchmarks execute entirely server-side, so
the wire never sits on the hot path.
"""

from __future__ import annotations

import itertools
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import rng as prng
from ..batch import RandomPolicy, batch_reset, rollout
from ..bench import BenchConfig, run_sweep
from ..config import ConfigError
from ..env import BatchState, BatchTimestep, EnvState, StepKind, Timestep
from ..environment import Environment
from ..factory import UnknownIdentifierError, make
from ..grids import profile_by_name
from ..render import RenderSpec, render_complete_task, render_pair, render_single
from ..tasks import DatasetError, parse_task_json
from .schemas import (
    BatchResetRequest,
    BatchStepRequest,
    BatchTimestepPayload,
    BenchRecordPayload,
    BenchRequest,
    MakeRequest,
    MakeResponse,
    MaskActionPayload,
    RenderRequest,
    RenderResponse,
    ResetRequest,
    RolloutRequest,
    RolloutResponse,
    StepRequest,
    TimestepPayload,
    ValidateRequest,
    ValidateResponse,
)

_DOMAIN_ERRORS = (ConfigError, DatasetError, UnknownIdentifierError, ValueError, KeyError)


class Session:
    def __init__(self, env: Environment):
        self.env = env
        self.state: EnvState | None = None
        self.batch: BatchState | None = None
        self.lock = threading.Lock()


class Registry:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    def add(self, env: Environment) -> str:
        with self._lock:
            env_id = f"env-{next(self._ids)}"
            self._sessions[env_id] = Session(env)
            return env_id

    def get(self, env_id: str) -> Session:
        try:
            return self._sessions[env_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no environment {env_id!r}")

    def drop(self, env_id: str) -> None:
        with self._lock:
            self._sessions.pop(env_id, None)


def _timestep_payload(ts: Timestep) -> TimestepPayload:
    return TimestepPayload(
        observation=ts.observation.tolist(),
        reward=ts.reward,
        step_kind=ts.step_kind.name.lower(),
        discount=ts.discount,
        info=ts.info,
    )


def _batch_payload(ts: BatchTimestep) -> BatchTimestepPayload:
    return BatchTimestepPayload(
        observations=ts.observation.tolist(),
        rewards=ts.reward.tolist(),
        step_kinds=[StepKind(int(k)).name.lower() for k in ts.step_kind],
        discounts=ts.discount.tolist(),
        similarities=ts.similarity.tolist(),
        solved=ts.solved.tolist(),
        applied=ts.applied.tolist(),
    )


def _decode_action(env: Environment, payload):
    if isinstance(payload, MaskActionPayload):
        op_idx = payload.op
        sel = np.asarray(payload.selection, dtype=bool)
        if sel.shape != env.params.profile.shape:
            raise ValueError(
                f"selection shape {sel.shape} does not match grid {env.params.profile.shape}"
            )
        return (op_idx, sel)
    return payload


def _decode_batch_actions(env: Environment, payloads):
    kind = env.adapter.kind
    if kind == "mask":
        ops = []
        sels = []
        for p in payloads:
            if not isinstance(p, MaskActionPayload):
                raise ValueError("mask action spaces need {op, selection} payloads")
            op, sel = _decode_action(env, p)
            ops.append(op)
            sels.append(sel)
        return (np.asarray(ops, dtype=np.int64), np.stack(sels))
    arr = np.asarray(payloads, dtype=np.int64)
    if kind == "flat":
        if arr.ndim != 1:
            raise ValueError("flat action spaces take one integer per lane")
    else:
        want = len(env.adapter.dims)
        if arr.ndim != 2 or arr.shape[1] != want:
            raise ValueError(f"{kind} action spaces take {want} integers per lane")
    return arr


def create_app() -> FastAPI:
    app = FastAPI(title="arcbatch", version="0.1.0")
    registry = Registry()

    @app.exception_handler(Exception)
    async def _domain_error(request, exc):
        from fastapi.responses import JSONResponse

        if isinstance(exc, _DOMAIN_ERRORS):
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        raise exc

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/envs", response_model=MakeResponse)
    def make_env(req: MakeRequest):
        source = req.config if req.config is not None else req.identifier
        env, _ = make(source, dataset_root=req.dataset_root)
        env_id = registry.add(env)
        return MakeResponse(
            env_id=env_id,
            action_space=env.action_space(),
            observation_shape=list(env.observation_shape()),
            num_tasks=env.buffer.num_tasks,
            task_ids=list(env.buffer.task_ids),
        )

    @app.get("/envs/{env_id}", response_model=MakeResponse)
    def describe_env(env_id: str):
        session = registry.get(env_id)
        return MakeResponse(
            env_id=env_id,
            action_space=session.env.action_space(),
            observation_shape=list(session.env.observation_shape()),
            num_tasks=session.env.buffer.num_tasks,
            task_ids=list(session.env.buffer.task_ids),
        )

    @app.delete("/envs/{env_id}")
    def close_env(env_id: str):
        registry.get(env_id)
        registry.drop(env_id)
        return {"closed": env_id}

    @app.post("/envs/{env_id}/reset", response_model=TimestepPayload)
    def reset_env(env_id: str, req: ResetRequest):
        session = registry.get(env_id)
        with session.lock:
            state, ts = session.env.reset(prng.from_seed(req.seed))
            session.state = state
        return _timestep_payload(ts)

    @app.post("/envs/{env_id}/step", response_model=TimestepPayload)
    def step_env(env_id: str, req: StepRequest):
        session = registry.get(env_id)
        with session.lock:
            if session.state is None:
                raise HTTPException(status_code=409, detail="reset before stepping")
            action = _decode_action(session.env, req.action)
            state, ts = session.env.step(session.state, action)
            session.state = state
        return _timestep_payload(ts)

    @app.post("/envs/{env_id}/batch_reset", response_model=BatchTimestepPayload)
    def batch_reset_env(env_id: str, req: BatchResetRequest):
        session = registry.get(env_id)
        with session.lock:
            state, ts = batch_reset(session.env, req.seed, req.num_envs)
            session.batch = state
        return _batch_payload(ts)

    @app.post("/envs/{env_id}/batch_step", response_model=BatchTimestepPayload)
    def batch_step_env(env_id: str, req: BatchStepRequest):
        session = registry.get(env_id)
        with session.lock:
            if session.batch is None:
                raise HTTPException(status_code=409, detail="batch_reset before batch_step")
            if len(req.actions) != session.batch.size:
                raise ValueError(
                    f"expected {session.batch.size} actions, got {len(req.actions)}"
                )
            actions = _decode_batch_actions(session.env, req.actions)
            state, ts = session.env.batch_step(session.batch, actions)
            session.batch = state
        return _batch_payload(ts)

    @app.post("/envs/{env_id}/rollout", response_model=RolloutResponse)
    def rollout_env(env_id: str, req: RolloutRequest):
        session = registry.get(env_id)
        if req.policy != "random":
            raise ValueError(f"unknown policy {req.policy!r}")
        with session.lock:
            env = session.env
            state, ts = batch_reset(env, req.seed, req.lanes)
            keys, counters = prng.keys_from_seed(req.seed ^ 0x5EED, req.lanes)
            result = rollout(
                env, state, ts, RandomPolicy(env), req.steps, keys, counters,
                workers=req.workers, record=req.record,
            )
        summary = result[2]
        return RolloutResponse(
            steps_total=summary.steps_total,
            episodes=summary.episodes.tolist(),
            successes=summary.successes.tolist(),
            reward_sums=summary.reward_sum.tolist(),
            records=result[3] if req.record else None,
        )

    @app.post("/bench", response_model=list[BenchRecordPayload])
    def bench(req: BenchRequest):
        source = req.config if req.config is not None else req.identifier
        if source is None:
            raise ValueError("bench needs a config or identifier")
        env, _ = make(source, dataset_root=req.dataset_root)
        kwargs = {}
        if req.batch_sizes is not None:
            kwargs["batch_sizes"] = tuple(req.batch_sizes)
        if req.steps_per_env is not None:
            kwargs["steps_per_env"] = req.steps_per_env
        if req.repeats is not None:
            kwargs["repeats"] = req.repeats
        if req.seed is not None:
            kwargs["seed"] = req.seed
        records = run_sweep(env, BenchConfig(**kwargs))
        return [BenchRecordPayload(**vars(r)) for r in records]

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest):
        root = Path(req.path)
        if not root.is_dir():
            raise ValueError(f"not a directory: {root}")
        cap = profile_by_name(req.profile)
        files = sorted(root.glob("*.json"), key=lambda p: p.stem)
        errors = []
        for f in files:
            try:
                parse_task_json(f.read_text(), f.stem, cap, path=f)
            except DatasetError as e:
                errors.append(str(e))
        if not files:
            errors.append(f"no tasks in {root}")
        return ValidateResponse(ok=not errors, files=len(files), errors=errors)

    @app.post("/render", response_model=RenderResponse)
    def render(req: RenderRequest):
        from ..grids import FULL, pad_into_buffer

        path = Path(req.data) / f"{req.task}.json"
        if not path.is_file():
            raise ValueError(f"task file not found: {path}")
        task = parse_task_json(path.read_text(), req.task, path=path)
        spec = RenderSpec(mode=req.mode, cell_px=req.cell_px)
        if req.mode == "complete_task":
            svg = render_complete_task(task, spec)
        elif req.mode == "pair":
            a, b = task.demo_pairs[0]
            svg = render_pair(pad_into_buffer(a, FULL), pad_into_buffer(b, FULL), spec)
        elif req.mode == "single":
            a, _ = task.demo_pairs[0]
            svg = render_single(pad_into_buffer(a, FULL), spec)
        else:
            raise ValueError(f"unknown render mode {req.mode!r}")
        return RenderResponse(svg=svg)

    return app
