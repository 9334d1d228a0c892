/** Canned service payloads, copied verbatim from the backend's output. */

import { TranslationPayload } from "../src/types.js";

export const FLAGSHIP: TranslationPayload = {
  source: "John does not believe that the queen is sixty-five years old",
  target: "John ne croit pas que la reine ait soixante-cinq ans",
  tree:
    "(UseHost (mkS negativePol (mkCl John_NP believe_VS" +
    " (fact2cl (aged (np2person (mkNP the_Det queen_N)) (mkNumeral \"65\"))))))",
  cost: 12.0,
  spans: [
    { start: 0, end: 30, layer: "syntactic" },
    { start: 31, end: 52, layer: "semantic" },
  ],
  sourceSpans: [
    { start: 0, end: 36, layer: "syntactic" },
    { start: 37, end: 60, layer: "semantic" },
  ],
  chunkBoundaries: [],
  alternatives: [
    { target: "John ne croit pas que la reine ait soixante-cinq ans", cost: 21.0 },
    { target: "John does not believe that la reine a soixante-cinq ans", cost: 46.5 },
    { target: "John does not believe that la reine a soixante-cinq ans", cost: 48.0 },
    { target: "John does not believe that la reine a soixante-cinq ans", cost: 51.5 },
  ],
};

export const OLD_CITY: TranslationPayload = {
  source: "this old city",
  target: "cette vieille ville",
  tree: "(UseChunks (OneChunk (ChunkNP (mkNP this_Det (mkCN old_A city_N)))))",
  cost: 15.0,
  spans: [{ start: 0, end: 19, layer: "word" }],
  sourceSpans: [{ start: 0, end: 13, layer: "word" }],
  chunkBoundaries: [[0, 13]],
  alternatives: [
    { target: "this old city", cost: 18.0 },
    { target: "this vieille ville", cost: 19.0 },
  ],
};

export const LANGUAGES = { languages: ["eng", "fra"] };

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
