/** Shapes of the translation service's JSON payloads. */

export type LayerName = "semantic" | "syntactic" | "word" | "unknown";

export interface Span {
  start: number;
  end: number;
  layer: LayerName;
}

export interface Alternative {
  target: string;
  cost: number;
}

export interface TranslationPayload {
  source: string;
  target: string;
  tree: string;
  cost: number;
  spans: Span[];
  sourceSpans: Span[];
  chunkBoundaries: [number, number][];
  alternatives: Alternative[];
}

export const LAYER_NAMES: readonly LayerName[] = ["semantic", "syntactic", "word", "unknown"];

export function isLayerName(value: unknown): value is LayerName {
  return typeof value === "string" && (LAYER_NAMES as readonly string[]).includes(value);
}

function isSpan(value: unknown): value is Span {
  if (typeof value !== "object" || value === null) return false;
  const s = value as Record<string, unknown>;
  return (
    typeof s.start === "number" && typeof s.end === "number" && isLayerName(s.layer)
  );
}

function isPair(value: unknown): value is [number, number] {
  return (
    Array.isArray(value) && value.length === 2 &&
    typeof value[0] === "number" && typeof value[1] === "number"
  );
}

/** Structural check so a broken or foreign response never half-renders. */
export function isTranslationPayload(value: unknown): value is TranslationPayload {
  if (typeof value !== "object" || value === null) return false;
  const p = value as Record<string, unknown>;
  return (
    typeof p.source === "string" &&
    typeof p.target === "string" &&
    typeof p.tree === "string" &&
    typeof p.cost === "number" &&
    Array.isArray(p.spans) && p.spans.every(isSpan) &&
    Array.isArray(p.sourceSpans) && p.sourceSpans.every(isSpan) &&
    Array.isArray(p.chunkBoundaries) && p.chunkBoundaries.every(isPair) &&
    Array.isArray(p.alternatives) &&
    p.alternatives.every(
      (a) =>
        typeof a === "object" && a !== null &&
        typeof (a as Record<string, unknown>).target === "string" &&
        typeof (a as Record<string, unknown>).cost === "number",
    )
  );
}
