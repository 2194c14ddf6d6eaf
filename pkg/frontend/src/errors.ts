/** Error types raised by the reward client and manifest loader. */

/**
 * The scorer subprocess died, failed to spawn, or broke protocol. Recoverable:
 * the client respawns the scorer on the next scoreBatch() (or an explicit
 * restart()); results from batches that already resolved are unaffected. Only
 * the in-flight batch is lost and should be retried.
 */
export class ScorerProcessError extends Error {
  override readonly name = 'ScorerProcessError';

  constructor(message: string, recoverable = true) {
    super(
      recoverable
        ? `${message} — the client will spawn a fresh scorer on the next ` +
            'scoreBatch() call (or call restart() explicitly); retry the failed ' +
            'batch, previously completed results are unaffected'
        : message,
    );
  }
}

/** A record handed to scoreBatch() that cannot be sent or matched. */
export class MalformedRecordError extends Error {
  override readonly name = 'MalformedRecordError';

  constructor(
    message: string,
    readonly index: number,
  ) {
    super(`record ${index}: ${message}`);
  }
}

/** A manifest line that is not valid JSON or fails the record schema. */
export class ManifestError extends Error {
  override readonly name = 'ManifestError';

  constructor(
    message: string,
    readonly line: number,
  ) {
    super(`line ${line}: ${message}`);
  }
}
