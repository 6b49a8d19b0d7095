import { describe, expect, it } from "vitest";

import { hashEncoder, resolveEncoder } from "../src/encoders";
import { l2Normalize } from "../src/embedfile";

function cosine(a: number[], b: number[]): number {
  const ua = l2Normalize(a);
  const ub = l2Normalize(b);
  return ua.reduce((acc, x, i) => acc + x * ub[i], 0);
}

describe("hashEncoder", () => {
  it("is deterministic across calls", async () => {
    const enc = hashEncoder(64);
    const [a] = await enc.encode(["the cat sat on the mat"]);
    const [b] = await enc.encode(["the cat sat on the mat"]);
    expect(a).toEqual(b);
  });

  it("gives token-overlapping pairs higher cosine than disjoint pairs", async () => {
    const enc = hashEncoder(128);
    const [close1, close2, far] = await enc.encode([
      "the cat sat on the mat",
      "a cat sat on some mat",
      "quarterly revenue exceeded forecasts",
    ]);
    expect(cosine(close1, close2)).toBeGreaterThan(cosine(close1, far));
  });

  it("self-similarity is exactly 1 after normalization", async () => {
    const enc = hashEncoder(32);
    const [v] = await enc.encode(["any text at all"]);
    expect(cosine(v, v)).toBeCloseTo(1.0, 12);
  });

  it("never produces a zero vector", async () => {
    const enc = hashEncoder(16);
    const [v] = await enc.encode(["???"]);
    expect(v.some((x) => x !== 0)).toBe(true);
  });

  it("rejects a bad dimension", () => {
    expect(() => hashEncoder(1)).toThrow();
  });
});

describe("resolveEncoder", () => {
  it("parses hash:<dim>", async () => {
    const enc = await resolveEncoder("hash:48");
    expect(enc.dim).toBe(48);
    expect(enc.maxSeqLen).toBeNull();
  });

  it("reports a clear error when transformers is unavailable", async () => {
    // The optional @xenova/transformers package is not installed in this
    // environment; model names must fail with an actionable message.
    await expect(resolveEncoder("all-MiniLM-L6-v2")).rejects.toThrow(/transformers/);
  });
});
