/** Page assembly and the edit-translate-render loop. */

import { ApiClient, MalformedResponse } from "./api.js";
import { Debouncer, QUIET_PERIOD_MS, RequestSequencer } from "./editor.js";
import { renderAnnotated, renderLegend } from "./render.js";
import { TranslationPayload } from "./types.js";

export interface SessionOptions {
  /** Override the quiet period; tests shorten it, the page never does. */
  quietPeriodMs?: number;
}

export class Session {
  readonly api: ApiClient;
  readonly root: HTMLElement;
  private readonly doc: Document;
  private readonly debouncer: Debouncer;
  private readonly sequencer = new RequestSequencer();

  private input!: HTMLTextAreaElement;
  private fromSelect!: HTMLSelectElement;
  private toSelect!: HTMLSelectElement;
  private banner!: HTMLElement;
  private errorPanel!: HTMLElement;
  private sourceView!: HTMLElement;
  private targetView!: HTMLElement;
  private treeView!: HTMLElement;
  private alternativesView!: HTMLOListElement;

  constructor(apiBase: string, root: HTMLElement, options: SessionOptions = {}) {
    this.api = new ApiClient(apiBase);
    this.root = root;
    this.doc = root.ownerDocument;
    this.debouncer = new Debouncer(options.quietPeriodMs ?? QUIET_PERIOD_MS);
    this.build();
    void this.loadLanguages();
  }

  private build(): void {
    const doc = this.doc;
    this.root.classList.add("studio");

    this.banner = doc.createElement("div");
    this.banner.className = "banner";
    this.banner.hidden = true;

    this.errorPanel = doc.createElement("div");
    this.errorPanel.className = "error-panel";
    this.errorPanel.hidden = true;

    const controls = doc.createElement("div");
    controls.className = "controls";
    this.fromSelect = doc.createElement("select");
    this.fromSelect.className = "lang-from";
    this.toSelect = doc.createElement("select");
    this.toSelect.className = "lang-to";
    const arrow = doc.createElement("span");
    arrow.className = "arrow";
    arrow.textContent = "→";
    controls.append(this.fromSelect, arrow, this.toSelect);

    this.input = doc.createElement("textarea");
    this.input.className = "editor-input";
    this.input.rows = 3;
    this.input.placeholder = "Type a sentence; green means fully understood.";

    this.sourceView = doc.createElement("div");
    this.sourceView.className = "source-view";
    this.targetView = doc.createElement("div");
    this.targetView.className = "target-view";

    const panel = doc.createElement("details");
    panel.className = "tree-panel";
    const summary = doc.createElement("summary");
    summary.textContent = "analysis";
    this.treeView = doc.createElement("pre");
    this.treeView.className = "tree";
    this.alternativesView = doc.createElement("ol");
    this.alternativesView.className = "alternatives";
    panel.append(summary, this.treeView, this.alternativesView);

    this.root.append(
      this.banner,
      this.errorPanel,
      controls,
      this.input,
      this.sourceView,
      this.targetView,
      panel,
      renderLegend(doc),
    );

    const onEdit = () => this.debouncer.schedule(() => void this.submit());
    this.input.addEventListener("input", onEdit);
    this.fromSelect.addEventListener("change", onEdit);
    this.toSelect.addEventListener("change", onEdit);
  }

  private async loadLanguages(): Promise<void> {
    try {
      const languages = await this.api.languages();
      for (const select of [this.fromSelect, this.toSelect]) {
        select.replaceChildren();
        for (const lang of languages) {
          const option = this.doc.createElement("option");
          option.value = lang;
          option.textContent = lang;
          select.append(option);
        }
      }
      if (languages.length > 1) this.toSelect.selectedIndex = 1;
    } catch (err) {
      this.showBanner(err);
    }
  }

  /** Issue a translate request for the current input; stale replies drop. */
  async submit(): Promise<void> {
    const text = this.input.value.trim();
    const ticket = this.sequencer.issue();
    if (text === "") {
      this.sourceView.replaceChildren();
      this.targetView.replaceChildren();
      this.treeView.textContent = "";
      this.alternativesView.replaceChildren();
      return;
    }
    try {
      const payload = await this.api.translate(text, this.fromSelect.value, this.toSelect.value);
      if (!this.sequencer.isCurrent(ticket)) return;
      this.clearErrors();
      this.renderPayload(payload);
    } catch (err) {
      if (!this.sequencer.isCurrent(ticket)) return;
      if (err instanceof MalformedResponse) {
        this.showErrorPanel(err.message);
      } else {
        this.showBanner(err);
      }
    }
  }

  private renderPayload(payload: TranslationPayload): void {
    this.sourceView.replaceChildren(
      renderAnnotated(this.doc, payload.source, payload.sourceSpans, payload.chunkBoundaries),
    );
    this.targetView.replaceChildren(
      renderAnnotated(this.doc, payload.target, payload.spans),
    );
    this.treeView.textContent = `${payload.tree}\ncost ${payload.cost}`;
    this.alternativesView.replaceChildren();
    for (const alt of payload.alternatives) {
      const item = this.doc.createElement("li");
      item.textContent = `${alt.target} (cost ${alt.cost})`;
      this.alternativesView.append(item);
    }
  }

  private showBanner(err: unknown): void {
    this.banner.textContent =
      `translation service unreachable: ${err instanceof Error ? err.message : String(err)}`;
    this.banner.hidden = false;
  }

  private showErrorPanel(message: string): void {
    this.errorPanel.textContent = message;
    this.errorPanel.hidden = false;
  }

  private clearErrors(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
    this.errorPanel.hidden = true;
    this.errorPanel.textContent = "";
  }
}

export function renderSession(
  apiBase: string,
  root: HTMLElement,
  options: SessionOptions = {},
): Session {
  return new Session(apiBase, root, options);
}
