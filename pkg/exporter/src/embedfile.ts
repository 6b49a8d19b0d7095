/**
 * The embedding interchange formats consumed by the classifier package.
 *
 * JSONL: line 1 is the header {"dim", "model", "kind", "normalized"}; each
 * further line is {"id", "parent", "vector"} with numbers at float32
 * precision. Packed binary: magic "LVK1", little-endian u32 dim, u64 record
 * count, then per record u16 id length, id bytes, u16 parent length, parent
 * bytes, dim float32 values (zero-length parent = no parent).
 */

import * as fs from "fs";

export interface EmbeddingRecord {
  id: string;
  parent: string | null;
  vector: number[];
}

export interface EmbeddingFile {
  dim: number;
  model: string;
  kind: string;
  normalized: boolean;
  records: EmbeddingRecord[];
}

function f32(x: number): number {
  return Math.fround(x);
}

export function l2Normalize(vector: number[]): number[] {
  const norm = Math.sqrt(vector.reduce((acc, x) => acc + x * x, 0));
  if (norm === 0) {
    throw new Error("cannot normalize a zero vector");
  }
  return vector.map((x) => x / norm);
}

export function writeEmbeddingFile(file: EmbeddingFile, path: string, format: "jsonl" | "packed" = "jsonl"): void {
  for (const rec of file.records) {
    if (rec.vector.length !== file.dim) {
      throw new Error(
        `record '${rec.id}' has ${rec.vector.length} components, expected ${file.dim}`,
      );
    }
  }
  if (format === "jsonl") {
    const lines: string[] = [
      JSON.stringify({
        dim: file.dim,
        model: file.model,
        kind: file.kind,
        normalized: file.normalized,
      }),
    ];
    for (const rec of file.records) {
      lines.push(
        JSON.stringify({ id: rec.id, parent: rec.parent, vector: rec.vector.map(f32) }),
      );
    }
    fs.writeFileSync(path, lines.join("\n") + "\n");
    return;
  }
  const chunks: Buffer[] = [];
  const head = Buffer.alloc(16);
  head.write("LVK1", 0, "ascii");
  head.writeUInt32LE(file.dim, 4);
  head.writeBigUInt64LE(BigInt(file.records.length), 8);
  chunks.push(head);
  for (const rec of file.records) {
    const idBytes = Buffer.from(rec.id, "utf8");
    const parentBytes = Buffer.from(rec.parent ?? "", "utf8");
    const lead = Buffer.alloc(2 + idBytes.length + 2 + parentBytes.length);
    let off = 0;
    off = lead.writeUInt16LE(idBytes.length, off);
    off += idBytes.copy(lead, off);
    off = lead.writeUInt16LE(parentBytes.length, off);
    parentBytes.copy(lead, off);
    const values = Buffer.alloc(4 * file.dim);
    rec.vector.forEach((x, i) => values.writeFloatLE(x, 4 * i));
    chunks.push(lead, values);
  }
  fs.writeFileSync(path, Buffer.concat(chunks));
}

/** Reader used by the exporter's own tests; the classifier package has the
 * authoritative loader. */
export function readEmbeddingFile(path: string): EmbeddingFile {
  const buf = fs.readFileSync(path);
  if (buf.subarray(0, 4).toString("ascii") === "LVK1") {
    const dim = buf.readUInt32LE(4);
    const count = Number(buf.readBigUInt64LE(8));
    const records: EmbeddingRecord[] = [];
    let off = 16;
    for (let i = 0; i < count; i++) {
      const idLen = buf.readUInt16LE(off);
      off += 2;
      const id = buf.subarray(off, off + idLen).toString("utf8");
      off += idLen;
      const parentLen = buf.readUInt16LE(off);
      off += 2;
      const parent = parentLen ? buf.subarray(off, off + parentLen).toString("utf8") : null;
      off += parentLen;
      const vector: number[] = [];
      for (let j = 0; j < dim; j++) {
        vector.push(buf.readFloatLE(off + 4 * j));
      }
      off += 4 * dim;
      records.push({ id, parent, vector });
    }
    if (off !== buf.length) {
      throw new Error(`${path}: trailing bytes after ${count} records`);
    }
    return { dim, model: "packed", kind: "document", normalized: false, records };
  }
  const lines = buf.toString("utf8").split("\n").filter((l) => l.trim());
  const header = JSON.parse(lines[0]);
  const records = lines.slice(1).map((line, i) => {
    const rec = JSON.parse(line);
    if (!Array.isArray(rec.vector) || rec.vector.length !== header.dim) {
      throw new Error(`${path}: record ${i} has wrong dimension`);
    }
    return { id: String(rec.id), parent: rec.parent ?? null, vector: rec.vector };
  });
  return {
    dim: header.dim,
    model: header.model,
    kind: header.kind,
    normalized: header.normalized,
    records,
  };
}
