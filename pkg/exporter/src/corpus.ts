/** Reading the corpus JSONL and class-spec inputs. */

import * as fs from "fs";
import * as yaml from "js-yaml";

export interface CorpusDocument {
  id: string;
  text: string;
  class: string | null;
}

export interface ClassSpec {
  name: string;
  keywords: string[];
}

export function readCorpusJsonl(path: string): CorpusDocument[] {
  const docs: CorpusDocument[] = [];
  const seen = new Set<string>();
  const lines = fs.readFileSync(path, "utf8").split("\n");
  lines.forEach((line, i) => {
    if (!line.trim()) {
      return;
    }
    let record: any;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: invalid JSON: ${err}`);
    }
    if (typeof record.id === "undefined" || typeof record.text === "undefined") {
      throw new Error(`${path}:${i + 1}: record must have 'id' and 'text'`);
    }
    const id = String(record.id);
    if (seen.has(id)) {
      throw new Error(`${path}:${i + 1}: duplicate document id '${id}'`);
    }
    seen.add(id);
    docs.push({ id, text: String(record.text), class: record.class ?? null });
  });
  return docs;
}

export function readClassSpecs(path: string): ClassSpec[] {
  const raw = fs.readFileSync(path, "utf8");
  const data: any =
    path.endsWith(".yaml") || path.endsWith(".yml") ? yaml.load(raw) : JSON.parse(raw);
  const list = Array.isArray(data) ? data : data?.classes;
  if (!Array.isArray(list) || list.length === 0) {
    throw new Error(`${path}: expected a non-empty list of classes or a 'classes' key`);
  }
  const names = new Set<string>();
  return list.map((entry: any, i: number) => {
    if (!entry?.name || !Array.isArray(entry.keywords) || entry.keywords.length === 0) {
      throw new Error(`${path}: class #${i} needs a name and a non-empty keywords array`);
    }
    const name = String(entry.name);
    if (names.has(name)) {
      throw new Error(`${path}: duplicate class name '${name}'`);
    }
    names.add(name);
    return { name, keywords: entry.keywords.map(String) };
  });
}
