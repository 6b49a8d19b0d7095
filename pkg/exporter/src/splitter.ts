/**
 * Sentence tokenization and paragraph splitting.
 *
 * This re-implements the classifier package's segmentation contract so the
 * embedding boundary cannot drift between the two components; the shared
 * test vectors in testdata/paragraph_boundaries.json assert that both sides
 * produce identical sentences and paragraphs.
 */

// Split after ., ! or ? when followed by whitespace. Whitespace between
// sentences is consumed; whitespace inside a sentence is preserved.
const SENTENCE_BOUNDARY = /(?<=[.!?])\s+/;

export function countWords(text: string): number {
  const words = text.split(/\s+/).filter((w) => w.length > 0);
  return words.length;
}

export function sentenceTokenize(text: string): string[] {
  const stripped = text.trim();
  if (!stripped) {
    return [];
  }
  return stripped.split(SENTENCE_BOUNDARY).filter((s) => s.length > 0);
}

/**
 * Greedily group sentences into paragraphs bounded by maxSeqLen / 2 words.
 *
 * A sentence joins the current paragraph only while the combined word count
 * stays strictly below half the maximum sequence length; otherwise the
 * paragraph is closed and the triggering sentence starts the next one. The
 * final non-empty paragraph is always emitted, so no sentence is dropped.
 * A single oversize sentence forms a paragraph by itself.
 */
export function splitSentences(sentences: string[], maxSeqLen: number): string[][] {
  if (maxSeqLen < 2) {
    throw new Error("maxSeqLen must be >= 2");
  }
  const threshold = maxSeqLen / 2;
  const paragraphs: string[][] = [];
  let current: string[] = [];
  let currentWords = 0;
  for (const sentence of sentences) {
    const n = countWords(sentence);
    if (currentWords + n < threshold) {
      current.push(sentence);
      currentWords += n;
    } else {
      if (current.length > 0) {
        paragraphs.push(current);
      }
      current = [sentence];
      currentWords = n;
    }
  }
  if (current.length > 0) {
    paragraphs.push(current);
  }
  return paragraphs;
}

/** Paragraphs of one document as plain strings (sentences joined by spaces). */
export function splitDocument(text: string, maxSeqLen: number): string[] {
  return splitSentences(sentenceTokenize(text), maxSeqLen).map((g) => g.join(" "));
}
