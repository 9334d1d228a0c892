/** Thin fetch client for the translation service. */

import { TranslationPayload, isTranslationPayload } from "./types.js";

/** The service answered, but not with anything we can render. */
export class MalformedResponse extends Error {
  constructor(detail: string) {
    super(`malformed response from translation service: ${detail}`);
    this.name = "MalformedResponse";
  }
}

/** The service rejected the request (4xx/5xx with an error message). */
export class ApiRejection extends Error {
  readonly status: number;
  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiRejection";
    this.status = status;
  }
}

export class ApiClient {
  readonly base: string;

  constructor(base: string) {
    this.base = base.replace(/\/+$/, "");
  }

  async languages(): Promise<string[]> {
    const body = await this.request("GET", "/v1/languages");
    if (
      typeof body !== "object" || body === null ||
      !Array.isArray((body as Record<string, unknown>).languages) ||
      !(body as { languages: unknown[] }).languages.every((l) => typeof l === "string")
    ) {
      throw new MalformedResponse("languages is not a string list");
    }
    return (body as { languages: string[] }).languages;
  }

  async translate(text: string, from: string, to: string, k = 5): Promise<TranslationPayload> {
    const body = await this.request("POST", "/v1/translate", { text, from, to, k });
    if (!isTranslationPayload(body)) {
      throw new MalformedResponse("translation payload has missing or mistyped fields");
    }
    return body;
  }

  private async request(method: string, path: string, payload?: unknown): Promise<unknown> {
    const response = await fetch(this.base + path, {
      method,
      headers: payload === undefined ? undefined : { "Content-Type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
    let body: unknown;
    try {
      body = await response.json();
    } catch {
      throw new MalformedResponse("body is not JSON");
    }
    if (!response.ok) {
      const message =
        typeof body === "object" && body !== null &&
        typeof (body as Record<string, unknown>).error === "string"
          ? (body as { error: string }).error
          : `status ${response.status}`;
      throw new ApiRejection(response.status, message);
    }
    return body;
  }
}
