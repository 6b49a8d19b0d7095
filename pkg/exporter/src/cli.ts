#!/usr/bin/env node
/**
 * Export paragraph or keyword embeddings for the classifier package.
 *
 *   node dist/cli.js --corpus corpus.jsonl --specs specs.yaml \
 *     --model all-MiniLM-L6-v2 --kind paragraph --out paragraphs.jsonl
 *
 * --model accepts a pretrained sentence-encoder name (run through
 * @xenova/transformers) or "hash:<dim>" for the offline hashing encoder.
 * With a transformer model, the input limit is read from the model config
 * unless --max-seq-len is given.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { readClassSpecs, readCorpusJsonl } from "./corpus";
import { writeEmbeddingFile } from "./embedfile";
import { resolveEncoder } from "./encoders";
import { ExportJob, exportKeywordEmbeddings, exportParagraphEmbeddings } from "./export";

async function run(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .option("corpus", { type: "string", describe: "corpus JSONL file" })
    .option("specs", { type: "string", describe: "class-spec file (YAML or JSON)" })
    .option("model", { type: "string", demandOption: true })
    .option("kind", {
      choices: ["paragraph", "keyword"] as const,
      default: "paragraph" as const,
    })
    .option("max-seq-len", { type: "number", describe: "encoder input limit in words" })
    .option("batch-size", { type: "number", default: 32 })
    .option("normalize", { type: "boolean", default: false })
    .option("out", { type: "string", demandOption: true })
    .option("format", { choices: ["jsonl", "packed"] as const, default: "jsonl" as const })
    .strict()
    .parse();

  const encoder = await resolveEncoder(argv.model);
  const maxSeqLen = argv.maxSeqLen ?? encoder.maxSeqLen;
  if (argv.kind === "paragraph" && !maxSeqLen) {
    throw new Error("--max-seq-len is required when the encoder declares no input limit");
  }
  const job: ExportJob = {
    encoder,
    maxSeqLen: maxSeqLen ?? 512,
    batchSize: argv.batchSize,
    normalize: argv.normalize,
  };

  if (argv.kind === "paragraph") {
    if (!argv.corpus) {
      throw new Error("--corpus is required for paragraph export");
    }
    const docs = readCorpusJsonl(argv.corpus);
    const file = await exportParagraphEmbeddings(job, docs);
    writeEmbeddingFile(file, argv.out, argv.format);
    console.log(
      `encoded ${file.records.length} paragraphs from ${docs.length} documents ` +
        `(dim=${file.dim}, model=${file.model}) -> ${argv.out}`,
    );
  } else {
    if (!argv.specs) {
      throw new Error("--specs is required for keyword export");
    }
    const specs = readClassSpecs(argv.specs);
    const file = await exportKeywordEmbeddings(job, specs);
    writeEmbeddingFile(file, argv.out, argv.format);
    console.log(
      `encoded ${file.records.length} keywords for ${specs.length} classes ` +
        `(dim=${file.dim}, model=${file.model}) -> ${argv.out}`,
    );
  }
  return 0;
}

run()
  .then((code) => process.exit(code))
  .catch((err) => {
    console.error(`error: ${err.message ?? err}`);
    process.exit(1);
  });
