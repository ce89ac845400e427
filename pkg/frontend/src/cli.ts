#!/usr/bin/env node
/**
 * embed-export export --model <id> --dataset <root> --out <path>
 *                     [--batch 16] [--max-len 512]
 *
 * Model ids: `hash:<dim>` selects the deterministic offline backend; any
 * other id is loaded through transformers.js. Errors print one `error: ...`
 * line and exit 2, matching the xlsearch CLI convention.
 */

import { parseArgs } from 'node:util';

import { resolveBackend } from './backends.js';
import { runExport } from './export.js';

const USAGE =
  'usage: embed-export export --model <id> --dataset <root> --out <path> [--batch 16] [--max-len 512]';

export async function run(argv: string[]): Promise<number> {
  if (argv[0] !== 'export') {
    process.stderr.write(`error: unknown command ${JSON.stringify(argv[0] ?? '')}\n${USAGE}\n`);
    return 2;
  }
  let parsed;
  try {
    parsed = parseArgs({
      args: argv.slice(1),
      options: {
        model: { type: 'string' },
        dataset: { type: 'string' },
        out: { type: 'string' },
        batch: { type: 'string', default: '16' },
        'max-len': { type: 'string', default: '512' },
      },
      allowPositionals: false,
    });
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n${USAGE}\n`);
    return 2;
  }
  const { model, dataset, out } = parsed.values;
  if (!model || !dataset || !out) {
    process.stderr.write(`error: --model, --dataset and --out are required\n${USAGE}\n`);
    return 2;
  }
  try {
    const backend = await resolveBackend(model);
    const stats = await runExport(
      {
        model,
        dataset,
        out,
        batch: Number(parsed.values.batch),
        maxLen: Number(parsed.values['max-len']),
      },
      backend,
      (msg) => process.stderr.write(`warning: ${msg}\n`),
    );
    process.stdout.write(
      `exported ${stats.count} vectors (dim=${stats.dim}, truncated=${stats.truncated}) to ${stats.out}\n`,
    );
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
}

const entry = process.argv[1] ?? '';
if (entry.endsWith('cli.js') || entry.endsWith('embed-export')) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
