/**
 * RewardClient: a thin, typed wrapper over the `ssr-forge score` subprocess.
 *
 * The scorer reads one JSON request per line on stdin and answers one JSON
 * response per line on stdout, in order. The client serializes batches (one
 * in flight at a time per client), matches responses back to requests by
 * record_id, and transparently respawns the scorer if it dies between
 * batches. Clients are not shareable across threads; run one per worker.
 */
import { spawn, type ChildProcessWithoutNullStreams } from 'node:child_process';
import { createInterface, type Interface } from 'node:readline';

import { MalformedRecordError, ScorerProcessError } from './errors';
import {
  scoreRequestSchema,
  scoreResponseSchema,
  type ScoreRequest,
  type ScoreResponse,
} from './schemas';

export interface RewardClientOptions {
  /** Scorer argv; defaults to the installed console script. */
  command?: readonly string[];
  /** Documented protocol epsilon for zero ground-truth counts (engine-fixed). */
  defaultEpsilon?: number;
}

const DEFAULT_COMMAND = ['ssr-forge', 'score'] as const;

export const PROTOCOL_VERSION = 1;

interface LiveProcess {
  proc: ChildProcessWithoutNullStreams;
  lines: Interface;
  exited: boolean;
}

export class RewardClient {
  readonly protocolVersion = PROTOCOL_VERSION;
  readonly defaultEpsilon: number;

  private readonly command: readonly string[];
  private live: LiveProcess | null = null;
  private chain: Promise<unknown> = Promise.resolve();
  private closed = false;

  constructor(options: RewardClientOptions = {}) {
    this.command = options.command ?? DEFAULT_COMMAND;
    this.defaultEpsilon = options.defaultEpsilon ?? 1e-9;
  }

  /** PID of the current scorer process, if one is running. */
  get pid(): number | undefined {
    return this.live?.proc.pid;
  }

  /** Score a single record. */
  async score(record: ScoreRequest): Promise<ScoreResponse> {
    const [response] = await this.scoreBatch([record]);
    if (response === undefined) {
      throw new ScorerProcessError('scorer returned no response');
    }
    return response;
  }

  /**
   * Score a batch of records; the returned array is in request order.
   * Batches are serialized: a second call made while one is in flight simply
   * queues behind it.
   */
  scoreBatch(records: readonly ScoreRequest[]): Promise<ScoreResponse[]> {
    const run = this.chain.then(() => this.runBatch(records));
    this.chain = run.catch(() => undefined); // a failed batch must not poison the queue
    return run;
  }

  /** Kill the current scorer (if any); the next batch spawns a fresh one. */
  restart(): void {
    this.dropProcess();
  }

  /** Kill the scorer and refuse further batches. */
  close(): void {
    this.closed = true;
    this.dropProcess();
  }

  // --------------------------------------------------------------------

  private dropProcess(): void {
    const live = this.live;
    this.live = null;
    if (live && !live.exited) {
      live.lines.close();
      live.proc.kill();
    }
  }

  private ensureProcess(): LiveProcess {
    if (this.live && !this.live.exited) {
      return this.live;
    }
    const [bin, ...args] = this.command;
    if (!bin) {
      throw new ScorerProcessError('empty scorer command', false);
    }
    const proc = spawn(bin, args, { stdio: ['pipe', 'pipe', 'pipe'] });
    const lines = createInterface({ input: proc.stdout, crlfDelay: Infinity });
    const live: LiveProcess = { proc, lines, exited: false };
    proc.once('exit', () => {
      live.exited = true;
      if (this.live === live) {
        this.live = null;
      }
    });
    proc.stderr.resume(); // keep the pipe drained; diagnostics surface via exit
    for (const pipe of [proc.stdin, proc.stdout, proc.stderr]) {
      // A dead scorer must not crash the host via an unhandled stream error;
      // the failure surfaces through the write callback or the exit event.
      pipe.on('error', () => {});
    }
    this.live = live;
    return live;
  }

  private validate(records: readonly ScoreRequest[]): string[] {
    return records.map((record, index) => {
      const parsed = scoreRequestSchema.safeParse(record);
      if (!parsed.success) {
        const issue = parsed.error.issues[0];
        throw new MalformedRecordError(
          issue ? `${issue.path.join('.') || '(record)'}: ${issue.message}` : 'invalid record',
          index,
        );
      }
      return JSON.stringify(record);
    });
  }

  private async runBatch(records: readonly ScoreRequest[]): Promise<ScoreResponse[]> {
    if (this.closed) {
      throw new ScorerProcessError('client is closed', false);
    }
    if (records.length === 0) {
      return [];
    }
    const payload = this.validate(records);
    const live = this.ensureProcess();

    const received = await new Promise<ScoreResponse[]>((resolve, reject) => {
      const responses: ScoreResponse[] = [];
      const cleanup = () => {
        live.lines.off('line', onLine);
        live.proc.off('exit', onExit);
        live.proc.off('error', onError);
      };
      const fail = (error: Error) => {
        cleanup();
        this.dropProcess();
        reject(error);
      };
      const onLine = (line: string) => {
        let parsed: unknown;
        try {
          parsed = JSON.parse(line);
        } catch {
          fail(new ScorerProcessError(`scorer wrote a non-JSON line: ${line.slice(0, 120)}`));
          return;
        }
        const checked = scoreResponseSchema.safeParse(parsed);
        if (!checked.success) {
          fail(new ScorerProcessError(`scorer response failed schema: ${line.slice(0, 120)}`));
          return;
        }
        responses.push(checked.data);
        if (responses.length === records.length) {
          cleanup();
          resolve(responses);
        }
      };
      const onExit = (code: number | null) => {
        fail(
          new ScorerProcessError(
            `scorer exited (code ${code}) after ${responses.length}/${records.length} responses`,
          ),
        );
      };
      const onError = (error: Error) => {
        fail(new ScorerProcessError(`scorer could not be spawned: ${error.message}`));
      };
      live.lines.on('line', onLine);
      live.proc.once('exit', onExit);
      live.proc.once('error', onError);
      live.proc.stdin.write(payload.join('\n') + '\n', (error) => {
        if (error) {
          fail(new ScorerProcessError(`could not write to scorer stdin: ${error.message}`));
        }
      });
    });

    return matchByRecordId(records, received);
  }
}

/** Reorder responses to request order, matching by record_id (FIFO on duplicates). */
function matchByRecordId(
  records: readonly ScoreRequest[],
  responses: readonly ScoreResponse[],
): ScoreResponse[] {
  const byId = new Map<string, ScoreResponse[]>();
  for (const response of responses) {
    const key = String(response.record_id);
    const bucket = byId.get(key);
    if (bucket) {
      bucket.push(response);
    } else {
      byId.set(key, [response]);
    }
  }
  return records.map((record, index) => {
    const match = byId.get(record.record_id)?.shift();
    if (!match) {
      throw new ScorerProcessError(
        `no response for record ${index} (record_id ${JSON.stringify(record.record_id)})`,
      );
    }
    return match;
  });
}
