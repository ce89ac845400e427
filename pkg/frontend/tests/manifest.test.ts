import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { fileURLToPath } from 'node:url';

import { afterAll, describe, expect, it } from 'vitest';

import { globToRegExp, loadSamples, readManifest } from '../src/manifest.js';

const HERE = path.dirname(fileURLToPath(import.meta.url));
const MINI = path.join(HERE, 'fixtures', 'mini');

const tmpDirs: string[] = [];

function makeDataset(manifest: object): string {
  const root = fs.mkdtempSync(path.join(os.tmpdir(), 'embexp-'));
  tmpDirs.push(root);
  fs.writeFileSync(path.join(root, 'dataset.json'), JSON.stringify(manifest));
  return root;
}

afterAll(() => {
  for (const dir of tmpDirs) fs.rmSync(dir, { recursive: true, force: true });
});

describe('globToRegExp', () => {
  it('expands * and ? and nothing else', () => {
    const star = globToRegExp('*.toy');
    expect(star.test('s0.toy')).toBe(true);
    expect(star.test('s0.toyz')).toBe(false);
    expect(star.test('.toy')).toBe(true);
    const q = globToRegExp('s?.toy');
    expect(q.test('s0.toy')).toBe(true);
    expect(q.test('s00.toy')).toBe(false);
  });

  it('treats regex metacharacters as literals', () => {
    const re = globToRegExp('a+b(c).toy');
    expect(re.test('a+b(c).toy')).toBe(true);
    expect(re.test('aab(c)xtoy')).toBe(false);
  });

  it('rejects path separators', () => {
    expect(() => globToRegExp('sub/*.toy')).toThrow(/must not cross/);
  });
});

describe('loadSamples on the mini fixture', () => {
  it('finds exactly the ten samples, sorted by id', () => {
    const samples = loadSamples(MINI);
    expect(samples.map((s) => s.id)).toEqual([
      'q00/alpha/s0.toy',
      'q00/beta/s0.toy',
      'q01/alpha/s0.toy',
      'q01/beta/s0.toy',
      'q02/alpha/s0.toy',
      'q02/beta/s0.toy',
      'q03/alpha/s0.toy',
      'q03/beta/s0.toy',
      'q04/alpha/s0.toy',
      'q04/beta/s0.toy',
    ]);
  });

  it('reads sample text verbatim', () => {
    const samples = loadSamples(MINI);
    const byId = new Map(samples.map((s) => [s.id, s.text]));
    expect(byId.get('q01/alpha/s0.toy')).toBe('a0 + a1\n');
    expect(byId.get('q04/beta/s0.toy')).toBe('seven = 7\nseven\n');
  });

  it('never includes sidecar .meta.json files', () => {
    // the fixture plants q00/alpha/s0.toy.meta.json on purpose
    expect(fs.existsSync(path.join(MINI, 'q00', 'alpha', 's0.toy.meta.json'))).toBe(true);
    const ids = loadSamples(MINI).map((s) => s.id);
    expect(ids.some((id) => id.includes('.meta.json'))).toBe(false);
  });
});

describe('loadSamples edge cases', () => {
  it('rejects a missing dataset root', () => {
    expect(() => loadSamples('/no/such/dataset')).toThrow(/does not exist/);
  });

  it('rejects a manifest without a problems table', () => {
    const root = makeDataset({ wrong: true });
    expect(() => readManifest(root)).toThrow(/problems/);
  });

  it('treats a missing language directory as empty', () => {
    const root = makeDataset({
      problems: { p: { languages: { ghost: ['*.toy'] } } },
    });
    expect(loadSamples(root)).toEqual([]);
  });

  it('accepts a single glob given as a bare string', () => {
    const root = makeDataset({
      problems: { p: { languages: { alpha: '*.toy' } } },
    });
    fs.mkdirSync(path.join(root, 'p', 'alpha'), { recursive: true });
    fs.writeFileSync(path.join(root, 'p', 'alpha', 'one.toy'), 'x\n');
    expect(loadSamples(root).map((s) => s.id)).toEqual(['p/alpha/one.toy']);
  });

  it('skips files that are not valid UTF-8, with a warning', () => {
    const root = makeDataset({
      problems: { p: { languages: { alpha: ['*.toy'] } } },
    });
    fs.mkdirSync(path.join(root, 'p', 'alpha'), { recursive: true });
    fs.writeFileSync(path.join(root, 'p', 'alpha', 'good.toy'), 'fine\n');
    fs.writeFileSync(path.join(root, 'p', 'alpha', 'bad.toy'), Buffer.from([0x61, 0xff, 0xfe]));
    const warnings: string[] = [];
    const samples = loadSamples(root, (msg) => warnings.push(msg));
    expect(samples.map((s) => s.id)).toEqual(['p/alpha/good.toy']);
    expect(warnings).toHaveLength(1);
    expect(warnings[0]).toMatch(/bad\.toy/);
  });

  it('deduplicates files matched by overlapping globs', () => {
    const root = makeDataset({
      problems: { p: { languages: { alpha: ['*.toy', 's*'] } } },
    });
    fs.mkdirSync(path.join(root, 'p', 'alpha'), { recursive: true });
    fs.writeFileSync(path.join(root, 'p', 'alpha', 's0.toy'), 'x\n');
    expect(loadSamples(root).map((s) => s.id)).toEqual(['p/alpha/s0.toy']);
  });
});
