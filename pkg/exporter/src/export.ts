/** Batch-encode corpus paragraphs and label keywords into embedding files. */

import { ClassSpec, CorpusDocument } from "./corpus";
import { Encoder } from "./encoders";
import { EmbeddingFile, EmbeddingRecord, l2Normalize } from "./embedfile";
import { splitDocument } from "./splitter";

export interface ExportJob {
  encoder: Encoder;
  /** Encoder input limit in words; used to bound paragraph length. */
  maxSeqLen: number;
  batchSize: number;
  normalize: boolean;
}

async function encodeAll(job: ExportJob, texts: string[]): Promise<number[][]> {
  const out: number[][] = [];
  for (let i = 0; i < texts.length; i += job.batchSize) {
    const batch = await job.encoder.encode(texts.slice(i, i + job.batchSize));
    for (let v of batch) {
      out.push(job.normalize ? l2Normalize(v) : v);
    }
  }
  return out;
}

function toFile(job: ExportJob, kind: string, records: EmbeddingRecord[]): EmbeddingFile {
  return {
    dim: job.encoder.dim,
    model: job.encoder.name,
    kind,
    normalized: job.normalize,
    records,
  };
}

/**
 * One vector per paragraph. Paragraph ids are "<docid>#<k>" with k the
 * 0-based paragraph index; parent is the document id.
 */
export async function exportParagraphEmbeddings(
  job: ExportJob,
  docs: CorpusDocument[],
): Promise<EmbeddingFile> {
  const ids: string[] = [];
  const parents: string[] = [];
  const texts: string[] = [];
  for (const doc of docs) {
    splitDocument(doc.text, job.maxSeqLen).forEach((paragraph, k) => {
      ids.push(`${doc.id}#${k}`);
      parents.push(doc.id);
      texts.push(paragraph);
    });
  }
  const vectors = await encodeAll(job, texts);
  const records = ids.map((id, i) => ({ id, parent: parents[i], vector: vectors[i] }));
  return toFile(job, "paragraph", records);
}

/**
 * One vector per label keyword, encoded individually. Keyword ids are
 * "<class>#<keyword>" (the same keyword may appear under several classes);
 * parent is the class name.
 */
export async function exportKeywordEmbeddings(
  job: ExportJob,
  specs: ClassSpec[],
): Promise<EmbeddingFile> {
  if (specs.length === 0) {
    throw new Error("no classes to export keywords for");
  }
  const ids: string[] = [];
  const parents: string[] = [];
  const texts: string[] = [];
  for (const spec of specs) {
    for (const keyword of spec.keywords) {
      ids.push(`${spec.name}#${keyword}`);
      parents.push(spec.name);
      texts.push(keyword);
    }
  }
  const vectors = await encodeAll(job, texts);
  const records = ids.map((id, i) => ({ id, parent: parents[i], vector: vectors[i] }));
  return toFile(job, "keyword", records);
}
