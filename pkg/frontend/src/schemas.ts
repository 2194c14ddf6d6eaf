/**
 * Wire-format schemas for the scoring protocol and the dataset manifest.
 *
 * The scorer subprocess speaks line-delimited JSON: one request object in,
 * one response object out, order preserved. Ground-truth and structured
 * predictions use tagged answer objects.
 */
import { z } from 'zod';

export const taskSchema = z.enum(['grounding', 'counting', 'jigsaw']);
export type Task = z.infer<typeof taskSchema>;

export const intervalAnswerSchema = z.object({
  type: z.literal('interval'),
  start: z.number().finite(),
  end: z.number().finite(),
});

export const countsAnswerSchema = z.object({
  type: z.literal('counts'),
  values: z.array(z.number().int().nonnegative()).nonempty(),
});

export const permutationAnswerSchema = z
  .object({
    type: z.literal('permutation'),
    order: z.array(z.number().int()).nonempty(),
  })
  .refine(
    (p) => {
      const sorted = [...p.order].sort((a, b) => a - b);
      return sorted.every((v, i) => v === i + 1);
    },
    { message: 'order must be a permutation of 1..n' },
  );

export const answerSchema = z.union([
  intervalAnswerSchema,
  countsAnswerSchema,
  permutationAnswerSchema,
]);
export type Answer = z.infer<typeof answerSchema>;

/**
 * A scoring request. Only record_id is validated client-side (it is what
 * responses are matched on); everything else passes through verbatim so the
 * scorer itself remains the single authority on malformed input — a bad
 * request comes back as a zero-score response with an error component,
 * exactly as a direct caller of the engine would see it.
 */
export const scoreRequestSchema = z
  .object({
    record_id: z.string().min(1),
  })
  .passthrough();

export interface ScoreRequest {
  record_id: string;
  task?: Task | string;
  gt?: Answer;
  pred?: Answer | null;
  pred_text?: string | null;
  [extra: string]: unknown;
}

export const scoreResponseSchema = z.object({
  record_id: z.union([z.string(), z.number(), z.null()]),
  smooth: z.number().min(0).max(1),
  strict: z.number().min(0).max(1),
  components: z.record(z.unknown()),
});
export type ScoreResponse = z.infer<typeof scoreResponseSchema>;

/** One line of a dataset manifest (manifest.jsonl), as the generator writes it. */
export const manifestRecordSchema = z.object({
  id: z.string().min(1),
  task: taskSchema,
  subtype: z.string(),
  difficulty: z.string(),
  video_dir: z.string(),
  fps: z.number().positive(),
  prompt: z.string(),
  answer: answerSchema,
  seed: z.number().int().nonnegative(),
  gen_params: z.record(z.unknown()),
});
export type ManifestRecord = z.infer<typeof manifestRecordSchema>;

/** One line of the golden-vector file: a request and the engine's response. */
export const testVectorSchema = z.object({
  request: scoreRequestSchema,
  expected: scoreResponseSchema,
});
export type TestVector = z.infer<typeof testVectorSchema>;
