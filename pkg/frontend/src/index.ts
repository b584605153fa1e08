export { ArcBatchClient, EnvHandle, ServiceError } from './client.js';
export type {
  ActionPayload,
  ActionSpace,
  BatchTimestep,
  BenchRecord,
  CompositeAction,
  EnvInfo,
  MaskAction,
  Observation,
  RolloutSummary,
  RunConfig,
  StepKindName,
  Timestep,
  TrajectoryRecord,
  ValidateReport,
} from './types.js';
