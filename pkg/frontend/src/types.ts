/**
 * Wire types for the arcbatch environment service.
 *
 * Observations are integer tensors shaped [channels][rows][cols];
 * color ids are 0-9 and 10 marks cells outside a grid's logical
 * region. Rewards, discounts and similarities are float64 and survive
 * JSON round-trips bit-exactly.
 */

export type StepKindName = 'first' | 'mid' | 'last';

export type Observation = number[][][];

/** point: [row, col, op]; bbox: [r1, c1, r2, c2, op]; flat: one integer. */
export type CompositeAction = number[] | number;

export interface MaskAction {
  op: number;
  selection: number[][];
}

export type ActionPayload = CompositeAction | MaskAction;

export interface ActionSpace {
  kind: 'mask' | 'point' | 'bbox' | 'flat';
  rows?: number;
  cols?: number;
  num_ops?: number;
  op_ids?: number[];
  dims?: number[];
  size?: number;
  inner?: ActionSpace;
}

export interface EnvInfo {
  env_id: string;
  action_space: ActionSpace;
  observation_shape: number[];
  num_tasks: number;
  task_ids: string[];
}

export interface Timestep {
  observation: Observation;
  reward: number;
  step_kind: StepKindName;
  discount: number;
  info: {
    similarity: number;
    solved: boolean;
    applied: boolean;
  };
}

export interface BatchTimestep {
  observations: Observation[];
  rewards: number[];
  step_kinds: StepKindName[];
  discounts: number[];
  similarities: number[];
  solved: boolean[];
  applied: boolean[];
}

export interface RolloutSummary {
  steps_total: number;
  episodes: number[];
  successes: number[];
  reward_sums: number[];
  records: TrajectoryRecord[] | null;
}

export interface TrajectoryRecord {
  lane: number;
  step: number;
  op: number;
  selection: number[];
  reward: number;
  similarity: number;
  step_kind: StepKindName;
}

export interface BenchRecord {
  batch_size: number;
  steps_total: number;
  best_seconds: number | null;
  mean_seconds: number | null;
  throughput_sps: number | null;
  warmup_seconds: number | null;
  skipped_reason: string | null;
}

export interface ValidateReport {
  ok: boolean;
  files: number;
  errors: string[];
}

/** Mirrors the service's run-config schema; plain JSON. */
export type RunConfig = Record<string, unknown>;
