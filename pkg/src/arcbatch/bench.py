"""Throughput benchmark harness: batch sweeps with warm-up exclusion.

For each batch size the harness runs one untimed warm-up rollout (the
engine has no compile step; the warm-up stands in for compile-time
exclusion and warms caches and allocators), then a fixed number of
timed rollouts under a random policy. Throughput is total steps (batch
size x steps per env) divided by wall seconds; best-of-repeats is the
headline number, the mean is reported alongside.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

from . import rng as prng
from .batch import RandomPolicy, rollout
from .environment import Environment

DESK_SCALE_SIZES = tuple(2 ** i for i in range(15))       # 1 .. 16384
FULL_SWEEP_SIZES = tuple(2 ** i for i in range(21))       # 1 .. 1048576


@dataclass(frozen=True)
class BenchConfig:
    batch_sizes: tuple[int, ...] = DESK_SCALE_SIZES
    steps_per_env: int = 100
    repeats: int = 5
    warmup_runs: int = 1
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(b) for b in self.batch_sizes)
        if not sizes or any(b < 1 for b in sizes):
            raise ValueError("batch sizes must be positive")
        if list(sizes) != sorted(sizes):
            raise ValueError("batch sizes must be sorted ascending")
        if self.repeats < 3:
            raise ValueError("repeats must be >= 3")
        if self.warmup_runs < 0:
            raise ValueError("warmup_runs must be >= 0")
        object.__setattr__(self, "batch_sizes", sizes)


@dataclass
class BenchRecord:
    batch_size: int
    steps_total: int
    best_seconds: float | None
    mean_seconds: float | None
    throughput_sps: float | None
    warmup_seconds: float | None
    skipped_reason: str | None = None


def _one_rollout(env: Environment, batch_size: int, steps: int, seed: int) -> int:
    keys, counters = prng.keys_from_seed(seed, batch_size)
    state, ts = env.batch_reset(keys, counters)
    policy_keys, policy_counters = prng.keys_from_seed(seed ^ 0x5EED, batch_size)
    _, _, summary = rollout(
        env, state, ts, RandomPolicy(env), steps, policy_keys, policy_counters
    )
    return summary.steps_total


def run_sweep(
    env: Environment,
    config: BenchConfig,
    clock=time.perf_counter,
) -> list[BenchRecord]:
    """Benchmark the environment over the configured batch sizes.

    The timed region covers reset + steps only; environment and buffer
    construction happen before the sweep and warm-up runs are untimed
    (their duration is recorded separately). A batch size that fails to
    allocate is recorded as skipped and the sweep continues.
    """
    records = []
    for batch in config.batch_sizes:
        try:
            warmup_seconds = 0.0
            for _ in range(config.warmup_runs):
                t0 = clock()
                _one_rollout(env, batch, config.steps_per_env, config.seed)
                warmup_seconds += clock() - t0
            times = []
            steps_total = 0
            for _ in range(config.repeats):
                t0 = clock()
                steps_total = _one_rollout(env, batch, config.steps_per_env, config.seed)
                times.append(clock() - t0)
        except MemoryError as e:
            records.append(BenchRecord(
                batch_size=batch,
                steps_total=batch * config.steps_per_env,
                best_seconds=None, mean_seconds=None, throughput_sps=None,
                warmup_seconds=None,
                skipped_reason=f"out of memory: {e}",
            ))
            continue
        best = min(times)
        records.append(BenchRecord(
            batch_size=batch,
            steps_total=steps_total,
            best_seconds=best,
            mean_seconds=sum(times) / len(times),
            throughput_sps=steps_total / best,
            warmup_seconds=warmup_seconds,
        ))
    return records


CSV_HEADER = [
    "batch_size", "steps_total", "best_seconds", "mean_seconds",
    "throughput_sps", "warmup_seconds", "skipped_reason",
]


def emit_csv(records: list[BenchRecord]) -> str:
    """Fixed-format CSV, one row per batch size."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        if r.skipped_reason is not None:
            writer.writerow([r.batch_size, r.steps_total, "", "", "", "", r.skipped_reason])
        else:
            writer.writerow([
                r.batch_size, r.steps_total,
                f"{r.best_seconds:.6f}", f"{r.mean_seconds:.6f}",
                f"{r.throughput_sps:.1f}", f"{r.warmup_seconds:.6f}", "",
            ])
    return out.getvalue()


def load_records_csv(text: str) -> list[BenchRecord]:
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        skipped = row.get("skipped_reason") or None
        records.append(BenchRecord(
            batch_size=int(row["batch_size"]),
            steps_total=int(row["steps_total"]),
            best_seconds=float(row["best_seconds"]) if row.get("best_seconds") else None,
            mean_seconds=float(row["mean_seconds"]) if row.get("mean_seconds") else None,
            throughput_sps=float(row["throughput_sps"]) if row.get("throughput_sps") else None,
            warmup_seconds=float(row["warmup_seconds"]) if row.get("warmup_seconds") else None,
            skipped_reason=skipped,
        ))
    return records


def _format_sps(value: float) -> str:
    if value >= 1e6:
        return f"{value / 1e6:.1f}M"
    if value >= 1e3:
        return f"{value / 1e3:.0f}K"
    return f"{value:.0f}"


def emit_speedup_table(
    ours: list[BenchRecord],
    baseline: list[BenchRecord],
    ours_mode: str = "vectorized",
    baseline_mode: str = "baseline",
) -> str:
    """Aligned-columns speedup table joined on batch size."""
    base_by_size = {r.batch_size: r for r in baseline}
    header = ["Batch Size", "SPS", "Mode", "Baseline SPS", "Mode", "Speedup"]
    rows = [header]
    for r in ours:
        if r.throughput_sps is None:
            continue
        b = base_by_size.get(r.batch_size)
        if b is not None and b.throughput_sps:
            speedup = f"{r.throughput_sps / b.throughput_sps:.1f}x"
            base_sps = _format_sps(b.throughput_sps)
        else:
            speedup = ""
            base_sps = ""
        rows.append([
            f"{r.batch_size:,}", _format_sps(r.throughput_sps), ours_mode,
            base_sps, baseline_mode if base_sps else "", speedup,
        ])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
