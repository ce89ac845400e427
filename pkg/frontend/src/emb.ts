/**
 * Writer for the REINF-EMB v1 embedding-table format consumed by xlsearch:
 * one header line, then one `"<id>"\t<base64 float32le>` row per sample,
 * sorted by id. Ids are JSON-quoted with non-ASCII escaped so files are
 * plain-ASCII regardless of platform defaults.
 */

export const EMB_MAGIC = 'REINF-EMB v1';

export interface EmbRow {
  id: string;
  vector: Float64Array | number[];
}

/** JSON string literal with \uXXXX escapes for everything outside ASCII. */
export function quoteId(id: string): string {
  const plain = JSON.stringify(id);
  return plain.replace(/[\u007f-\uffff]/g, (ch) => {
    return '\\u' + ch.charCodeAt(0).toString(16).padStart(4, '0');
  });
}

export function encodeF32(vector: ArrayLike<number>): string {
  const buf = Buffer.alloc(vector.length * 4);
  for (let i = 0; i < vector.length; i++) {
    buf.writeFloatLE(vector[i], i * 4);
  }
  return buf.toString('base64');
}

export function formatEmbTable(rows: EmbRow[], dim: number, provenance: string): string {
  if (!Number.isInteger(dim) || dim < 1) {
    throw new Error(`dim must be a positive integer, got ${dim}`);
  }
  if (provenance.includes('\n')) {
    throw new Error('provenance must be a single line');
  }
  const seen = new Set<string>();
  const sorted = [...rows].sort((a, b) => (a.id < b.id ? -1 : a.id > b.id ? 1 : 0));
  const lines = [`${EMB_MAGIC} dim=${dim} count=${rows.length} provenance=${provenance}`];
  for (const row of sorted) {
    if (seen.has(row.id)) {
      throw new Error(`duplicate sample id ${JSON.stringify(row.id)}`);
    }
    seen.add(row.id);
    if (row.vector.length !== dim) {
      throw new Error(
        `vector for ${JSON.stringify(row.id)} has dim ${row.vector.length}, table dim is ${dim}`,
      );
    }
    let nonzero = false;
    for (let i = 0; i < row.vector.length; i++) {
      const v = row.vector[i];
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite entry in vector for ${JSON.stringify(row.id)}`);
      }
      // the reader rejects rows that quantize to all-zero float32
      if (Math.fround(v) !== 0) nonzero = true;
    }
    if (!nonzero) {
      throw new Error(`zero vector for ${JSON.stringify(row.id)}`);
    }
    lines.push(`${quoteId(row.id)}\t${encodeF32(row.vector)}`);
  }
  return lines.join('\n') + '\n';
}
