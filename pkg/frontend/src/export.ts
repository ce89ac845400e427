/**
 * The export job: walk a dataset, embed every sample in batches, and write
 * one REINF-EMB v1 table. Deterministic for a fixed model and inputs.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

import type { ModelBackend } from './backends.js';
import { EmbRow, formatEmbTable } from './emb.js';
import { loadSamples } from './manifest.js';

export interface ExportJob {
  model: string;
  dataset: string;
  out: string;
  batch: number;
  maxLen: number;
}

export interface ExportStats {
  count: number;
  dim: number;
  truncated: number;
  out: string;
}

export function validateJob(job: ExportJob): void {
  const problems: string[] = [];
  if (!Number.isInteger(job.batch) || job.batch < 1) {
    problems.push(`batch must be a positive integer, got ${job.batch}`);
  }
  if (!Number.isInteger(job.maxLen) || job.maxLen < 1) {
    problems.push(`max-len must be a positive integer, got ${job.maxLen}`);
  }
  if (!job.out) problems.push('missing output path');
  if (!job.dataset) problems.push('missing dataset root');
  if (problems.length > 0) {
    throw new Error(problems.join('; '));
  }
}

export async function runExport(
  job: ExportJob,
  backend: ModelBackend,
  warn: (msg: string) => void = console.warn,
): Promise<ExportStats> {
  validateJob(job);
  const samples = loadSamples(job.dataset, warn);
  const rows: EmbRow[] = [];
  let truncated = 0;
  for (let start = 0; start < samples.length; start += job.batch) {
    const slice = samples.slice(start, start + job.batch);
    const result = await backend.embedBatch(
      slice.map((s) => s.text),
      job.maxLen,
    );
    if (result.vectors.length !== slice.length) {
      throw new Error(
        `backend returned ${result.vectors.length} vectors for a batch of ${slice.length}`,
      );
    }
    truncated += result.truncated;
    slice.forEach((sample, i) => {
      const vec = result.vectors[i];
      if (vec.length !== backend.dim) {
        throw new Error(
          `backend emitted dim ${vec.length} but reports width ${backend.dim}`,
        );
      }
      rows.push({ id: sample.id, vector: vec });
    });
  }
  const provenance = `export:model=${job.model};pooling=mean+l2;max_len=${job.maxLen}`;
  const body = formatEmbTable(rows, backend.dim, provenance);
  fs.mkdirSync(path.dirname(path.resolve(job.out)), { recursive: true });
  fs.writeFileSync(job.out, body, { encoding: 'utf-8' });
  return { count: rows.length, dim: backend.dim, truncated, out: job.out };
}
