/**
 * Text encoders behind one interface.
 *
 * `transformers:` (or a bare model name) runs a pretrained sentence encoder
 * through @xenova/transformers with mean pooling; it needs that package
 * installed and the model available locally or over the network.
 *
 * `hash:<dim>` is a deterministic, dependency-free feature-hashing encoder:
 * token counts are hashed into signed buckets. It carries no semantics
 * beyond lexical overlap and exists so pipelines and tests can run offline.
 */

export interface Encoder {
  name: string;
  dim: number;
  /** The model's true input limit in words/tokens, when it has one. */
  maxSeqLen: number | null;
  encode(texts: string[]): Promise<number[][]>;
}

const TOKEN = /[\p{L}\p{N}]+/gu;

function tokens(text: string): string[] {
  const out: string[] = [];
  for (const match of text.toLowerCase().matchAll(TOKEN)) {
    if (match[0].length >= 2) {
      out.push(match[0]);
    }
  }
  return out;
}

function fnv1a(s: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

export function hashEncoder(dim: number): Encoder {
  if (!Number.isInteger(dim) || dim < 2) {
    throw new Error(`hash encoder dim must be an integer >= 2, got ${dim}`);
  }
  return {
    name: `hash:${dim}`,
    dim,
    maxSeqLen: null,
    async encode(texts: string[]): Promise<number[][]> {
      return texts.map((text) => {
        const v = new Array<number>(dim).fill(0);
        const toks = tokens(text);
        for (const tok of toks) {
          const h = fnv1a(tok);
          const bucket = h % dim;
          const sign = (h >>> 24) & 1 ? 1 : -1;
          v[bucket] += sign;
        }
        // A text with no usable tokens still gets a nonzero marker vector,
        // as a real encoder never produces exact zeros.
        if (toks.length === 0) {
          v[0] = 1;
        }
        return v;
      });
    },
  };
}

// Kept out of the static module graph: the package is optional, ESM-only,
// and must not be rewritten to require() by the CommonJS compilation.
const importTransformers = new Function(
  "return import('@xenova/transformers')",
) as () => Promise<any>;

export async function transformersEncoder(model: string): Promise<Encoder> {
  let pipeline: any;
  try {
    ({ pipeline } = await importTransformers());
  } catch (err) {
    throw new Error(
      "the @xenova/transformers package is not installed; " +
        "run `npm install @xenova/transformers`, or use the offline `hash:<dim>` encoder",
    );
  }
  const extractor = await pipeline("feature-extraction", model);
  const tokenizer = extractor.tokenizer;
  const declared = Number(tokenizer?.model_max_length);
  const maxSeqLen = Number.isFinite(declared) && declared > 0 && declared < 1e9 ? declared : null;
  const probe = await extractor("probe", { pooling: "mean", normalize: false });
  const dim = probe.dims[probe.dims.length - 1];
  return {
    name: model,
    dim,
    maxSeqLen,
    async encode(texts: string[]): Promise<number[][]> {
      const out = await extractor(texts, { pooling: "mean", normalize: false });
      const [batch, width] = out.dims.length === 2 ? out.dims : [1, out.dims[0]];
      const data: number[] = Array.from(out.data);
      const vectors: number[][] = [];
      for (let i = 0; i < batch; i++) {
        vectors.push(data.slice(i * width, (i + 1) * width));
      }
      return vectors;
    },
  };
}

/** Pick an encoder from a --model string. */
export async function resolveEncoder(model: string): Promise<Encoder> {
  if (model.startsWith("hash:")) {
    return hashEncoder(Number(model.slice("hash:".length)));
  }
  return transformersEncoder(model.replace(/^transformers:/, ""));
}
