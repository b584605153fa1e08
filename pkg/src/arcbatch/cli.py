"""Command-line interface; a thin in-process client of the core package.

Exit codes: 0 ok, 1 domain error (bad data, unknown task), 2 usage
error. `serve` starts the HTTP service for remote clients.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import rng as prng
from .batch import RandomPolicy, batch_reset, rollout
from .bench import emit_csv, emit_speedup_table, load_records_csv, run_sweep
from .config import ConfigError, apply_overrides, load_config
from .factory import UnknownIdentifierError, make
from .grids import profile_by_name
from .render import (
    RenderSpec,
    render_complete_task,
    render_complete_task_terminal,
    render_pair,
    render_pair_terminal,
    render_rl_step,
    render_rl_step_terminal,
    render_single,
    render_single_terminal,
)
from .tasks import (
    DatasetError,
    FetchError,
    fetch_dataset,
    generate_synthetic_tasks,
    parse_task_json,
    write_dataset,
)

_DOMAIN_ERRORS = (ConfigError, DatasetError, FetchError, UnknownIdentifierError, ValueError)


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load(config_path: str, overrides: tuple[str, ...]):
    config = load_config(config_path)
    if overrides:
        config = apply_overrides(config, list(overrides))
    return config


@click.group()
def main():
    """Batched grid-puzzle environment engine."""


@main.command()
@click.argument("path", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--profile", default="full", show_default=True, help="Grid capacity profile.")
def validate(path: Path, profile: str):
    """Parse every task file in PATH and report errors."""
    cap = profile_by_name(profile)
    files = sorted(path.glob("*.json"), key=lambda p: p.stem)
    if not files:
        _fail(f"no tasks in {path}")
    errors = 0
    for f in files:
        try:
            parse_task_json(f.read_text(), f.stem, cap, path=f)
        except DatasetError as e:
            errors += 1
            click.echo(str(e), err=True)
    click.echo(f"{len(files) - errors}/{len(files)} task files ok")
    if errors:
        sys.exit(1)


@main.command("rollout")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--steps", default=100, show_default=True)
@click.option("--lanes", default=1, show_default=True)
@click.option("--policy", type=click.Choice(["random"]), default="random", show_default=True)
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--workers", default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Trajectory JSONL path (default: stdout summary only).")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE")
def cmd_rollout(config_path, steps, lanes, policy, seed, workers, out, overrides):
    """Run a random-policy rollout; optionally record a trajectory."""
    try:
        config = _load(config_path, overrides)
        env, _ = make(config)
        run_seed = config.seed if seed is None else seed
        state, ts = batch_reset(env, run_seed, lanes)
        policy_keys, policy_counters = prng.keys_from_seed(run_seed ^ 0x5EED, lanes)
        result = rollout(
            env, state, ts, RandomPolicy(env), steps, policy_keys, policy_counters,
            workers=workers, record=out is not None,
        )
    except _DOMAIN_ERRORS as e:
        _fail(str(e))
    summary = result[2]
    if out is not None:
        records = result[3]
        with open(out, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        click.echo(f"wrote {len(records)} records to {out}")
    click.echo(
        f"lanes={lanes} steps={steps} total_steps={summary.steps_total} "
        f"episodes={int(summary.episodes.sum())} successes={int(summary.successes.sum())} "
        f"reward_sum={float(summary.reward_sum.sum()):.4f}"
    )


@main.command("bench")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--full-sweep", is_flag=True, help="Sweep to 2^20 lanes instead of 2^14.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output path.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON records to stdout.")
@click.option("--baseline", type=click.Path(exists=True), default=None,
              help="Baseline CSV for a speedup table.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE")
def cmd_bench(config_path, seed, full_sweep, out, as_json, baseline, overrides):
    """Run the batch-size throughput sweep."""
    try:
        config = _load(config_path, overrides)
        env, _ = make(config)
        bench_cfg = config.bench_config(seed=seed, full_sweep=full_sweep)
        records = run_sweep(env, bench_cfg)
    except _DOMAIN_ERRORS as e:
        _fail(str(e))
    csv_text = emit_csv(records)
    if out is not None:
        Path(out).write_text(csv_text)
        click.echo(f"wrote {out}")
    if as_json:
        click.echo(json.dumps([vars(r) for r in records], sort_keys=True))
    elif out is None:
        click.echo(csv_text, nl=False)
    if baseline is not None:
        base = load_records_csv(Path(baseline).read_text())
        click.echo(emit_speedup_table(records, base), nl=False)


@main.command("render")
@click.option("--data", type=click.Path(exists=True, file_okay=False), default=None,
              help="Dataset directory (for task views).")
@click.option("--task", "task_id", default=None, help="Task id within --data.")
@click.option("--mode", type=click.Choice(["single", "pair", "complete_task", "rl_step"]),
              default="complete_task", show_default=True)
@click.option("--pair", "pair_index", default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Config for rl_step replay.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--step", "step_index", default=0, show_default=True,
              help="Transition to replay for rl_step.")
@click.option("--cell-px", default=20, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="SVG output path.")
@click.option("--ascii", "use_ascii", is_flag=True, help="Plain ASCII instead of ANSI color.")
def cmd_render(data, task_id, mode, pair_index, config_path, seed, step_index,
               cell_px, out, use_ascii):
    """Render a task or a replayed transition, as SVG or to the terminal."""
    spec = RenderSpec(mode=mode, cell_px=cell_px)
    try:
        if mode == "rl_step":
            if config_path is None:
                raise ConfigError("", "rl_step rendering needs --config")
            text = _render_rl_step(config_path, seed, step_index, spec, out is None, use_ascii)
        else:
            if data is None or task_id is None:
                raise ConfigError("", f"{mode} rendering needs --data and --task")
            text = _render_task(Path(data), task_id, mode, pair_index, spec, out is None, use_ascii)
    except _DOMAIN_ERRORS as e:
        _fail(str(e))
    if out is not None:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


def _render_task(data, task_id, mode, pair_index, spec, terminal, use_ascii):
    from .grids import FULL, pad_into_buffer

    path = data / f"{task_id}.json"
    if not path.is_file():
        raise DatasetError("task file not found", path)
    task = parse_task_json(path.read_text(), task_id, path=path)
    if mode == "complete_task":
        if terminal:
            return render_complete_task_terminal(task, spec, ansi=not use_ascii)
        return render_complete_task(task, spec)
    if pair_index >= len(task.demo_pairs):
        raise DatasetError(f"task has {len(task.demo_pairs)} demo pairs", path)
    a, b = task.demo_pairs[pair_index]
    ga, gb = pad_into_buffer(a, FULL), pad_into_buffer(b, FULL)
    if mode == "pair":
        if terminal:
            return render_pair_terminal(ga, gb, spec, ansi=not use_ascii)
        return render_pair(ga, gb, spec)
    if terminal:
        return render_single_terminal(ga, spec, ansi=not use_ascii)
    return render_single(ga, spec)


def _render_rl_step(config_path, seed, step_index, spec, terminal, use_ascii):
    config = load_config(config_path)
    env, _ = make(config)
    state, _ = env.reset(prng.from_seed(seed))
    keys, counters = prng.keys_from_seed(seed ^ 0x5EED, 1)
    for _ in range(step_index + 1):
        actions, counters = env.sample_actions(keys, counters)
        action = (actions[0][0], actions[1][0]) if isinstance(actions, tuple) else actions[0]
        before = state
        core_action = env.adapter.to_core(action)
        state, ts = env.step(state, action)
    if terminal:
        return render_rl_step_terminal(before, core_action, state, ts.reward, spec,
                                       ansi=not use_ascii)
    return render_rl_step(before, core_action, state, ts.reward, spec)


@main.command("fetch")
@click.argument("name")
@click.option("--dest", type=click.Path(file_okay=False), required=True)
@click.option("--table", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Dataset URL/digest table (YAML).")
def cmd_fetch(name, dest, table):
    """Download and unpack a named dataset archive (digest-verified)."""
    try:
        path = fetch_dataset(name, Path(dest), table=table)
    except _DOMAIN_ERRORS as e:
        _fail(str(e))
    click.echo(str(path))


@main.command("synth")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--tasks", "count", default=149, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--profile", default="mini", show_default=True)
def cmd_synth(out, count, seed, profile):
    """Write a deterministic synthetic dataset for offline use."""
    tasks = generate_synthetic_tasks(count, profile_by_name(profile), seed)
    write_dataset(tasks, Path(out))
    click.echo(f"wrote {len(tasks)} tasks to {out}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def cmd_serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
