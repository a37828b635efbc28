import { readFileSync } from 'node:fs';

import type { TreeDoc } from '../src/types.js';
import { assertTreeDoc } from '../src/types.js';

export function loadFixture(name: string): TreeDoc {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return assertTreeDoc(JSON.parse(readFileSync(url, 'utf-8')));
}

export const FULL_TREE = 'golden_tree_full.json';
export const DEPTH1_TREE = 'golden_tree_depth1.json';
