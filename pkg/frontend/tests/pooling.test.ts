import { describe, expect, it } from 'vitest';

import { l2Normalize, meanPool } from '../src/pooling.js';

describe('meanPool', () => {
  it('averages only the unmasked positions', () => {
    // rows: [1,2], [3,4], [100,200]; the last is padding
    const hidden = [1, 2, 3, 4, 100, 200];
    const pooled = meanPool(hidden, [1, 1, 0], 3, 2);
    expect([...pooled]).toEqual([2, 3]);
  });

  it('is exact for a single active position', () => {
    const pooled = meanPool([7, -3, 9, 9], [1, 0], 2, 2);
    expect([...pooled]).toEqual([7, -3]);
  });

  it('accepts a fully active mask', () => {
    const pooled = meanPool([1, 3, 5], [1, 1, 1], 3, 1);
    expect(pooled[0]).toBeCloseTo(3, 12);
  });

  it('rejects shape mismatches', () => {
    expect(() => meanPool([1, 2, 3], [1, 1], 2, 2)).toThrow(/expected 2x2/);
    expect(() => meanPool([1, 2, 3, 4], [1], 2, 2)).toThrow(/mask has 1/);
  });

  it('rejects an all-padding mask', () => {
    expect(() => meanPool([1, 2], [0, 0], 2, 1)).toThrow(/non-padding/);
  });
});

describe('l2Normalize', () => {
  it('scales to unit length', () => {
    const vec = l2Normalize(new Float64Array([3, 4]));
    expect([...vec]).toEqual([0.6, 0.8]);
  });

  it('maps the zero vector to the first basis vector', () => {
    const vec = l2Normalize(new Float64Array(4));
    expect([...vec]).toEqual([1, 0, 0, 0]);
  });

  it('leaves unit vectors with unit norm', () => {
    const vec = l2Normalize(new Float64Array([1e-8, -2e-8, 3e-8]));
    const norm = Math.hypot(...vec);
    expect(norm).toBeCloseTo(1, 12);
  });
});
