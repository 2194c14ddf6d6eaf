export { PROTOCOL_VERSION, RewardClient, type RewardClientOptions } from './client';
export { MalformedRecordError, ManifestError, ScorerProcessError } from './errors';
export { loadManifest, readManifest } from './manifest';
export {
  answerSchema,
  countsAnswerSchema,
  intervalAnswerSchema,
  manifestRecordSchema,
  permutationAnswerSchema,
  scoreRequestSchema,
  scoreResponseSchema,
  taskSchema,
  testVectorSchema,
  type Answer,
  type ManifestRecord,
  type ScoreRequest,
  type ScoreResponse,
  type Task,
  type TestVector,
} from './schemas';
