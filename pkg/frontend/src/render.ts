/** Pure DOM construction from API payloads.
 *
 * Nothing here inspects the text linguistically: every class, badge, and
 * marker is a direct function of the span layers and chunk boundaries the
 * service reported, so identical payloads always render identically.
 */

import { LayerName, Span } from "./types.js";

export const BADGE: Record<LayerName, string> = {
  semantic: "S",
  syntactic: "Y",
  word: "W",
  unknown: "U",
};

export const LEGEND: { layer: LayerName; color: string; meaning: string }[] = [
  { layer: "semantic", color: "green", meaning: "understood precisely" },
  { layer: "syntactic", color: "yellow", meaning: "structure understood" },
  { layer: "word", color: "red", meaning: "word-by-word chunks" },
];

// Boundary marker characters; doubled brackets read as "chunk" visually
// and survive copy-paste as plain text.
export const CHUNK_OPEN = "⟦";
export const CHUNK_CLOSE = "⟧";

function spanElement(doc: Document, piece: string, layer: LayerName): HTMLElement {
  const el = doc.createElement("span");
  el.className = `layer layer-${layer}`;
  el.dataset.layer = layer;
  const badge = doc.createElement("sup");
  badge.className = "badge";
  badge.textContent = BADGE[layer];
  el.append(piece, badge);
  return el;
}

function marker(doc: Document, which: "open" | "close"): HTMLElement {
  const el = doc.createElement("span");
  el.className = `chunk-marker chunk-${which}`;
  el.textContent = which === "open" ? CHUNK_OPEN : CHUNK_CLOSE;
  return el;
}

/** Text with confidence spans and, optionally, chunk boundary markers.
 *
 * Span gaps (inter-span whitespace) come through as plain text nodes.
 * Markers are emitted at the exact reported offsets, outside span
 * elements, so they never change which characters carry a layer.
 */
export function renderAnnotated(
  doc: Document,
  text: string,
  spans: Span[],
  boundaries: [number, number][] = [],
): DocumentFragment {
  const cuts = new Set<number>([0, text.length]);
  for (const s of spans) {
    cuts.add(s.start);
    cuts.add(s.end);
  }
  for (const [open, close] of boundaries) {
    cuts.add(open);
    cuts.add(close);
  }
  const offsets = Array.from(cuts).sort((a, b) => a - b);

  const opens = new Map<number, number>();
  const closes = new Map<number, number>();
  for (const [open, close] of boundaries) {
    opens.set(open, (opens.get(open) ?? 0) + 1);
    closes.set(close, (closes.get(close) ?? 0) + 1);
  }
  const layerAt = (pos: number): LayerName | null => {
    for (const s of spans) {
      if (s.start <= pos && pos < s.end) return s.layer;
    }
    return null;
  };

  const fragment = doc.createDocumentFragment();
  const emitMarkers = (offset: number) => {
    for (let i = 0; i < (closes.get(offset) ?? 0); i++) fragment.append(marker(doc, "close"));
    for (let i = 0; i < (opens.get(offset) ?? 0); i++) fragment.append(marker(doc, "open"));
  };
  for (let i = 0; i < offsets.length - 1; i++) {
    const from = offsets[i]!;
    const to = offsets[i + 1]!;
    emitMarkers(from);
    const piece = text.slice(from, to);
    const layer = layerAt(from);
    if (layer === null) {
      fragment.append(doc.createTextNode(piece));
    } else {
      fragment.append(spanElement(doc, piece, layer));
    }
  }
  emitMarkers(text.length);
  return fragment;
}

/** The fixed three-level legend; colors are class-driven like the spans. */
export function renderLegend(doc: Document): HTMLElement {
  const legend = doc.createElement("ul");
  legend.className = "legend";
  for (const { layer, color, meaning } of LEGEND) {
    const item = doc.createElement("li");
    item.className = `legend-item layer-${layer}`;
    item.dataset.layer = layer;
    item.textContent = `${color}: ${meaning} (${BADGE[layer]})`;
    legend.append(item);
  }
  return legend;
}
