/**
 * Lazy manifest reader: streams manifest.jsonl line by line, validating each
 * record against the wire schema. Fails with the offending line number; a
 * line is only read (and only validated) when the consumer asks for it.
 */
import { createReadStream } from 'node:fs';
import { createInterface } from 'node:readline';

import { ManifestError } from './errors';
import { manifestRecordSchema, type ManifestRecord } from './schemas';

export async function* loadManifest(path: string): AsyncGenerator<ManifestRecord, void, void> {
  const input = createReadStream(path, { encoding: 'utf-8' });
  const lines = createInterface({ input, crlfDelay: Infinity });
  // readline does not forward input-stream failures (e.g. a missing file);
  // capture them so they reject the iteration instead of crashing the process.
  let streamError: Error | null = null;
  input.on('error', (error) => {
    streamError = error;
    lines.close();
  });
  let lineNumber = 0;
  try {
    for await (const raw of lines) {
      lineNumber += 1;
      const text = raw.trim();
      if (!text) {
        continue;
      }
      let parsed: unknown;
      try {
        parsed = JSON.parse(text);
      } catch (error) {
        throw new ManifestError(`invalid JSON: ${(error as Error).message}`, lineNumber);
      }
      const checked = manifestRecordSchema.safeParse(parsed);
      if (!checked.success) {
        const issue = checked.error.issues[0];
        throw new ManifestError(
          issue ? `${issue.path.join('.') || '(record)'}: ${issue.message}` : 'invalid record',
          lineNumber,
        );
      }
      yield checked.data;
    }
    if (streamError !== null) {
      throw streamError;
    }
  } finally {
    lines.close();
    input.destroy();
  }
}

/** Eager convenience wrapper over loadManifest. */
export async function readManifest(path: string): Promise<ManifestRecord[]> {
  const records: ManifestRecord[] = [];
  for await (const record of loadManifest(path)) {
    records.push(record);
  }
  return records;
}
