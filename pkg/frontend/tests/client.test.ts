/**
 * End-to-end client tests against a live service process.
 *
 * The suite boots the Python service, generates the deterministic
 * fixture dataset, and replays the committed golden trajectories; the
 * client must reproduce every engine-native value bit-exactly.
 */

import { spawn, spawnSync, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { createServer } from 'node:net';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ArcBatchClient, EnvHandle, ServiceError } from '../src/client.js';
import type { RunConfig, Timestep } from '../src/types.js';

const PYTHON = process.env.ARCBATCH_PYTHON ?? 'python3';
const REPO_ROOT = join(__dirname, '..', '..');
const GOLDEN_DIR = join(REPO_ROOT, 'tests', 'golden', 'bindings');

interface GoldenStep {
  action: number[];
  observation: number[][][];
  reward: number;
  step_kind: string;
  discount: number;
  similarity: number;
  solved: boolean;
  applied: boolean;
}

interface GoldenTrajectory {
  seed: number;
  reset: {
    observation: number[][][];
    reward: number;
    step_kind: string;
    discount: number;
    similarity: number;
  };
  steps: GoldenStep[];
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, '127.0.0.1', () => {
      const address = srv.address();
      if (address === null || typeof address === 'string') {
        reject(new Error('no port assigned'));
        return;
      }
      const port = address.port;
      srv.close(() => resolve(port));
    });
  });
}

let server: ChildProcess;
let client: ArcBatchClient;
let dataDir: string;
let workDir: string;

function fixtureConfig(): RunConfig {
  return {
    dataset: { root: dataDir },
    env: { grid_profile: 'mini' },
    wrappers: { action: 'point', auto_reset: false },
  };
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'arcbatch-client-'));
  dataDir = join(workDir, 'mini');
  // same deterministic fixture the golden trajectories were built from
  const synth = spawnSync(
    PYTHON,
    ['-m', 'arcbatch.cli', 'synth', '--out', dataDir, '--tasks', '12', '--seed', '5'],
    { cwd: REPO_ROOT, encoding: 'utf8' },
  );
  if (synth.status !== 0) {
    throw new Error(`fixture dataset generation failed: ${synth.stderr}`);
  }

  const port = await freePort();
  server = spawn(
    PYTHON,
    ['-m', 'arcbatch.cli', 'serve', '--port', String(port)],
    { cwd: REPO_ROOT, stdio: 'ignore' },
  );
  client = new ArcBatchClient(`http://127.0.0.1:${port}`);
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    if (await client.health()) return;
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error('service never became healthy');
}, 60_000);

afterAll(async () => {
  server?.kill('SIGINT');
  await new Promise((r) => setTimeout(r, 300));
  server?.kill('SIGKILL');
  rmSync(workDir, { recursive: true, force: true });
});

function expectTimestepMatches(got: Timestep, want: GoldenStep | GoldenTrajectory['reset']) {
  expect(got.observation).toStrictEqual(want.observation);
  expect(got.reward).toBe(want.reward);
  expect(got.step_kind).toBe(want.step_kind);
  expect(got.discount).toBe(want.discount);
  expect(got.info.similarity).toBe(want.similarity);
}

describe('golden trajectory equivalence', () => {
  for (const seed of [0, 1, 2]) {
    it(`replays seed ${seed} bit-exactly`, async () => {
      const golden: GoldenTrajectory = JSON.parse(
        readFileSync(join(GOLDEN_DIR, `seed${seed}.json`), 'utf8'),
      );
      const env = await client.makeEnv(fixtureConfig());
      try {
        const first = await env.reset(seed);
        expectTimestepMatches(first, golden.reset);
        for (const step of golden.steps) {
          const ts = await env.step(step.action);
          expectTimestepMatches(ts, step);
          expect(ts.info.solved).toBe(step.solved);
          expect(ts.info.applied).toBe(step.applied);
        }
      } finally {
        await env.close();
      }
    }, 60_000);
  }
});

describe('spaces and batch contract', () => {
  let env: EnvHandle;

  beforeAll(async () => {
    env = await client.makeEnv(fixtureConfig());
  });

  afterAll(async () => {
    await env.close();
  });

  it('describes the action and observation spaces', () => {
    expect(env.info.action_space.kind).toBe('point');
    expect(env.info.action_space.num_ops).toBe(35);
    expect(env.info.action_space.dims).toStrictEqual([5, 5, 35]);
    expect(env.info.observation_shape).toStrictEqual([1, 5, 5]);
    expect(env.info.num_tasks).toBe(12);
  });

  it('holds the batch shape contract at 64 lanes', async () => {
    const reset = await env.batchReset(0, 64);
    expect(reset.observations).toHaveLength(64);
    for (const obs of reset.observations) {
      expect(obs).toHaveLength(1);
      expect(obs[0]).toHaveLength(5);
      expect(obs[0][0]).toHaveLength(5);
    }
    expect(reset.rewards).toHaveLength(64);
    expect(new Set(reset.step_kinds)).toStrictEqual(new Set(['first']));

    const actions = Array.from({ length: 64 }, (_, i) => [i % 5, (i * 3) % 5, i % 35]);
    const stepped = await env.batchStep(actions);
    expect(stepped.observations).toHaveLength(64);
    expect(stepped.similarities).toHaveLength(64);
    expect(stepped.solved).toHaveLength(64);
    // lanes that submitted (op 34) are terminal, everything else is mid
    stepped.step_kinds.forEach((kind, i) => {
      expect(kind).toBe(i % 35 === 34 ? 'last' : 'mid');
    });
  });

  it('rejects wrong action arity', async () => {
    await env.reset(0);
    await expect(env.step([1, 2])).rejects.toBeInstanceOf(ServiceError);
  });

  it('rejects a wrong batch lane count', async () => {
    await env.batchReset(1, 4);
    await expect(env.batchStep([[0, 0, 1]])).rejects.toMatchObject({ status: 400 });
  });
});

describe('service utilities', () => {
  it('runs server-side rollouts deterministically', async () => {
    const env = await client.makeEnv(fixtureConfig());
    try {
      const a = await env.rollout({ steps: 25, lanes: 4, seed: 9, record: true });
      const b = await env.rollout({ steps: 25, lanes: 4, seed: 9, record: true });
      expect(a.steps_total).toBe(100);
      expect(a).toStrictEqual(b);
      expect(a.records).toHaveLength(100);
    } finally {
      await env.close();
    }
  }, 60_000);

  it('validates the fixture dataset', async () => {
    const report = await client.validate(dataDir, 'mini');
    expect(report).toStrictEqual({ ok: true, files: 12, errors: [] });
  });

  it('renders a task to SVG', async () => {
    const svg = await client.renderTask(dataDir, 'synth_003');
    expect(svg.startsWith('<svg ')).toBe(true);
  });

  it('surfaces domain errors with status 400', async () => {
    await expect(
      client.makeEnv({ dataset: { root: '/definitely/missing' } }),
    ).rejects.toMatchObject({ status: 400 });
  });

  it('returns 404 for unknown environments', async () => {
    const env = await client.makeEnv(fixtureConfig());
    await env.close();
    await expect(env.reset(0)).rejects.toBeInstanceOf(ServiceError);
  });
});
