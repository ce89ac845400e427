/**
 * Dataset walking that mirrors the xlsearch corpus loader: a dataset.json
 * manifest maps problem ids to per-language glob lists; matched files become
 * samples with id `<problem>/<language>/<filename>`. Sidecar `*.meta.json`
 * files are never samples. Unreadable files are skipped with a warning so a
 * single bad file does not sink a long export.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

export interface Sample {
  id: string;
  text: string;
}

interface Manifest {
  problems: Record<string, ProblemSpec>;
}

interface ProblemSpec {
  languages?: Record<string, string | string[]>;
  [key: string]: unknown;
}

/** Filename glob -> RegExp; `*` and `?` only, which is all manifests use. */
export function globToRegExp(pattern: string): RegExp {
  if (pattern.includes('/')) {
    throw new Error(`glob ${JSON.stringify(pattern)} must not cross directories`);
  }
  const escaped = pattern.replace(/[.+^${}()|[\]\\]/g, '\\$&');
  return new RegExp('^' + escaped.replace(/\*/g, '[^/]*').replace(/\?/g, '[^/]') + '$');
}

export function readManifest(root: string): Manifest {
  const manifestPath = path.join(root, 'dataset.json');
  const raw = JSON.parse(fs.readFileSync(manifestPath, 'utf-8'));
  if (typeof raw !== 'object' || raw === null || typeof raw.problems !== 'object') {
    throw new Error(`manifest ${manifestPath} lacks a "problems" table`);
  }
  return raw as Manifest;
}

export function loadSamples(root: string, warn: (msg: string) => void = console.warn): Sample[] {
  if (!fs.existsSync(root) || !fs.statSync(root).isDirectory()) {
    throw new Error(`dataset root ${root} does not exist`);
  }
  const manifest = readManifest(root);
  const samples = new Map<string, Sample>();

  for (const problemId of Object.keys(manifest.problems).sort()) {
    const spec = manifest.problems[problemId];
    const languages = spec.languages ?? {};
    for (const language of Object.keys(languages).sort()) {
      let globs = languages[language];
      if (typeof globs === 'string') globs = [globs];
      const langDir = path.join(root, problemId, language);
      let names: string[];
      try {
        names = fs.readdirSync(langDir);
      } catch {
        continue; // mirror of the loader: a missing language dir matches nothing
      }
      const matched = new Set<string>();
      for (const pattern of globs) {
        const re = globToRegExp(pattern);
        for (const name of names) {
          if (re.test(name)) matched.add(name);
        }
      }
      for (const name of [...matched].sort()) {
        if (name.endsWith('.meta.json')) continue;
        const id = `${problemId}/${language}/${name}`;
        if (samples.has(id)) {
          throw new Error(`duplicate sample id ${JSON.stringify(id)}`);
        }
        let text: string;
        try {
          const blob = fs.readFileSync(path.join(langDir, name));
          text = blob.toString('utf-8');
          if (!Buffer.from(text, 'utf-8').equals(blob)) {
            throw new Error('invalid UTF-8');
          }
        } catch (err) {
          warn(`skipping ${id}: ${(err as Error).message}`);
          continue;
        }
        samples.set(id, { id, text });
      }
    }
  }
  return [...samples.keys()].sort().map((id) => samples.get(id)!);
}
