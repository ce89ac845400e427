/**
 * Mean pooling over non-padding token positions. `hidden` is the flattened
 * [seqLen, dim] final hidden state; `mask` marks real tokens with nonzero
 * entries. Padded positions contribute nothing to the mean.
 */
export function meanPool(
  hidden: ArrayLike<number>,
  mask: ArrayLike<number>,
  seqLen: number,
  dim: number,
): Float64Array {
  if (hidden.length !== seqLen * dim) {
    throw new Error(`hidden has ${hidden.length} values, expected ${seqLen}x${dim}`);
  }
  if (mask.length !== seqLen) {
    throw new Error(`mask has ${mask.length} entries, expected ${seqLen}`);
  }
  const out = new Float64Array(dim);
  let active = 0;
  for (let t = 0; t < seqLen; t++) {
    if (!mask[t]) continue;
    active += 1;
    const base = t * dim;
    for (let d = 0; d < dim; d++) {
      out[d] += hidden[base + d];
    }
  }
  if (active === 0) {
    throw new Error('mean pooling needs at least one non-padding position');
  }
  for (let d = 0; d < dim; d++) {
    out[d] /= active;
  }
  return out;
}

/** L2-normalize in place; an all-zero vector becomes the first basis vector. */
export function l2Normalize(vec: Float64Array): Float64Array {
  let sumsq = 0;
  for (let i = 0; i < vec.length; i++) sumsq += vec[i] * vec[i];
  const norm = Math.sqrt(sumsq);
  if (norm === 0) {
    vec[0] = 1;
    return vec;
  }
  for (let i = 0; i < vec.length; i++) vec[i] /= norm;
  return vec;
}
