/**
 * Gym-style client for the arcbatch environment service.
 *
 * The service owns all episode state; this client carries seeds,
 * actions and timesteps over JSON. One EnvHandle per concurrent
 * caller.
 */

import type {
  ActionPayload,
  BatchTimestep,
  BenchRecord,
  EnvInfo,
  RolloutSummary,
  RunConfig,
  Timestep,
  ValidateReport,
} from './types.js';

export class ServiceError extends Error {
  constructor(
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = 'ServiceError';
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    ...init,
    headers: { 'Content-Type': 'application/json', ...init?.headers },
  });
  const text = await resp.text();
  if (!resp.ok) {
    let detail = text;
    try {
      detail = JSON.stringify(JSON.parse(text).detail ?? text);
    } catch {
      // non-JSON error body; keep raw text
    }
    throw new ServiceError(`${resp.status} ${resp.statusText}: ${detail}`, resp.status);
  }
  return JSON.parse(text) as T;
}

export class ArcBatchClient {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, '')}${path}`;
  }

  async health(): Promise<boolean> {
    try {
      const body = await request<{ status: string }>(this.url('/health'));
      return body.status === 'ok';
    } catch {
      return false;
    }
  }

  /** Build an environment from a run config or a "<dataset>/<task>" id. */
  async makeEnv(
    source: RunConfig | string,
    datasetRoot?: string,
  ): Promise<EnvHandle> {
    const body =
      typeof source === 'string'
        ? { identifier: source, dataset_root: datasetRoot }
        : { config: source, dataset_root: datasetRoot };
    const info = await request<EnvInfo>(this.url('/envs'), {
      method: 'POST',
      body: JSON.stringify(body),
    });
    return new EnvHandle(this, info);
  }

  async validate(path: string, profile = 'full'): Promise<ValidateReport> {
    return request(this.url('/validate'), {
      method: 'POST',
      body: JSON.stringify({ path, profile }),
    });
  }

  async renderTask(data: string, task: string, mode = 'complete_task'): Promise<string> {
    const body = await request<{ svg: string }>(this.url('/render'), {
      method: 'POST',
      body: JSON.stringify({ data, task, mode }),
    });
    return body.svg;
  }

  async bench(
    source: RunConfig | string,
    options: {
      batchSizes?: number[];
      stepsPerEnv?: number;
      repeats?: number;
      seed?: number;
      datasetRoot?: string;
    } = {},
  ): Promise<BenchRecord[]> {
    const body = {
      ...(typeof source === 'string' ? { identifier: source } : { config: source }),
      dataset_root: options.datasetRoot,
      batch_sizes: options.batchSizes,
      steps_per_env: options.stepsPerEnv,
      repeats: options.repeats,
      seed: options.seed,
    };
    return request(this.url('/bench'), { method: 'POST', body: JSON.stringify(body) });
  }

  /** @internal */
  call<T>(path: string, init?: RequestInit): Promise<T> {
    return request(this.url(path), init);
  }
}

export class EnvHandle {
  private closed = false;

  constructor(
    private readonly client: ArcBatchClient,
    public readonly info: EnvInfo,
  ) {}

  get id(): string {
    return this.info.env_id;
  }

  private post<T>(suffix: string, body: unknown): Promise<T> {
    if (this.closed) {
      return Promise.reject(new ServiceError('environment handle is closed', 0));
    }
    return this.client.call<T>(`/envs/${this.id}${suffix}`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  reset(seed = 0): Promise<Timestep> {
    return this.post('/reset', { seed });
  }

  step(action: ActionPayload): Promise<Timestep> {
    return this.post('/step', { action });
  }

  batchReset(seed: number, numEnvs: number): Promise<BatchTimestep> {
    return this.post('/batch_reset', { seed, num_envs: numEnvs });
  }

  batchStep(actions: ActionPayload[]): Promise<BatchTimestep> {
    return this.post('/batch_step', { actions });
  }

  rollout(options: {
    steps: number;
    lanes?: number;
    seed?: number;
    workers?: number;
    record?: boolean;
  }): Promise<RolloutSummary> {
    return this.post('/rollout', {
      steps: options.steps,
      lanes: options.lanes ?? 1,
      seed: options.seed ?? 0,
      workers: options.workers ?? 1,
      record: options.record ?? false,
    });
  }

  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    await this.client.call(`/envs/${this.id}`, { method: 'DELETE' });
  }
}
