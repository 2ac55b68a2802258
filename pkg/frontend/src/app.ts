/**
 * Review console controller.
 *
 * Three screens: start (pick corpus, give seed ids or a seed query),
 * session (judge the pending batch, keyboard-first), summary (finished,
 * trajectory download). The service owns all algorithm state; the client
 * holds only the current snapshot and this batch's judgments, so a page
 * reload recovers by re-fetching the snapshot for the stored session id.
 *
 * Keys: r = relevant, n = not relevant, j/k or arrows = move, Enter =
 * submit once the whole batch is judged.
 */

import { ServiceError, type ReviewApi, type Snapshot } from "./api.js";
import { BatchJudgments } from "./judgments.js";
import { armBars, counterBar, documentCard, el, errorBanner, foundSparkline } from "./render.js";

const STORAGE_KEY = "activesearch.session";

export class App {
  private snapshot: Snapshot | null = null;
  private judgments = new BatchJudgments([]);
  private submitting = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ReviewApi,
    private readonly storage: Storage,
  ) {}

  async boot(): Promise<void> {
    document.addEventListener("keydown", (event) => this.onKey(event));
    const stored = this.storage.getItem(STORAGE_KEY);
    if (stored) {
      try {
        this.applySnapshot(await this.api.getSession(stored));
        return;
      } catch (err) {
        if (err instanceof ServiceError && err.retryable) {
          this.renderError(err, () => void this.boot());
          return;
        }
        this.storage.removeItem(STORAGE_KEY); // stale session id
      }
    }
    await this.renderStart();
  }

  // ---- start screen ------------------------------------------------------

  private async renderStart(): Promise<void> {
    this.root.textContent = "";
    const screen = el("div", "screen start-screen");
    screen.appendChild(el("h1", "", "activesearch review"));
    let corpora;
    try {
      corpora = (await this.api.listCorpora()).corpora;
    } catch (err) {
      this.renderError(err, () => void this.renderStart());
      return;
    }

    const form = el("form", "start-form");
    const corpusSelect = el("select", "corpus-select");
    for (const corpus of corpora) {
      const option = el("option", "", `${corpus.name} (${corpus.documents} docs, ${corpus.clusters} clusters)`);
      option.value = corpus.name;
      corpusSelect.appendChild(option);
    }
    form.appendChild(labelled("corpus", corpusSelect));

    const queryInput = el("input", "seed-query");
    queryInput.placeholder = "seed query, e.g. offshore transfer audit";
    form.appendChild(labelled("seed query", queryInput));

    const idsInput = el("input", "seed-ids");
    idsInput.placeholder = "or known-relevant doc ids, comma separated";
    form.appendChild(labelled("seed ids", idsInput));

    const hint = el("p", "form-hint",
      "Give either a query with corpus vocabulary overlap or at least one known-relevant id.");
    form.appendChild(hint);

    const start = el("button", "btn-start", "start session");
    start.type = "submit";
    form.appendChild(start);

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const seedIds = idsInput.value.split(",").map((s) => s.trim()).filter(Boolean);
      const query = queryInput.value.trim();
      if (seedIds.length === 0 && query === "") {
        hint.classList.add("form-error");
        hint.textContent = "Empty seed: enter a query or at least one doc id.";
        return;
      }
      void this.createSession(corpusSelect.value, seedIds, query, hint);
    });
    screen.appendChild(form);
    this.root.appendChild(screen);
  }

  private async createSession(corpus: string, seedIds: string[], query: string,
                              hint: HTMLElement): Promise<void> {
    try {
      const snapshot = await this.api.createSession({
        corpus,
        seed_ids: seedIds.length ? seedIds : undefined,
        seed_query: query || undefined,
      });
      this.storage.setItem(STORAGE_KEY, snapshot.session_id);
      this.applySnapshot(snapshot);
    } catch (err) {
      if (err instanceof ServiceError && err.code === "NoSeeds") {
        hint.classList.add("form-error");
        hint.textContent =
          `No usable seed (${err.detail}). Try a query that shares terms with ` +
          "the corpus, or paste ids of documents you already know are relevant.";
        return;
      }
      this.renderError(err, () => void this.createSession(corpus, seedIds, query, hint));
    }
  }

  // ---- session screen ----------------------------------------------------

  private applySnapshot(snapshot: Snapshot): void {
    this.snapshot = snapshot;
    this.judgments = new BatchJudgments(snapshot.pending.map((d) => d.id));
    if (snapshot.status === "finished") {
      this.renderSummary();
    } else {
      this.renderSession();
    }
  }

  private renderSession(): void {
    const snapshot = this.snapshot;
    if (!snapshot) return;
    this.root.textContent = "";
    const screen = el("div", "screen session-screen");

    const side = el("aside", "sidebar");
    side.appendChild(counterBar(snapshot));
    side.appendChild(el("h2", "", "found so far"));
    side.appendChild(foundSparkline(snapshot.found_curve));
    side.appendChild(el("h2", "", "cluster posteriors"));
    side.appendChild(armBars(snapshot.arms));
    screen.appendChild(side);

    const mainCol = el("main", "batch");
    mainCol.appendChild(el("h2", "batch-title",
      `batch of ${snapshot.pending.length} - judge every document`));
    for (const doc of snapshot.pending) {
      mainCol.appendChild(documentCard(doc, this.judgments, {
        onJudge: (docId, value) => this.judge(docId, value),
        onFocus: (docId) => {
          this.judgments.focus(docId);
          this.renderSession();
        },
      }));
    }
    const submit = el("button", "btn-submit",
      this.judgments.complete ? "submit batch (Enter)" : "judge the whole batch to submit");
    submit.disabled = !this.judgments.complete || this.submitting;
    submit.addEventListener("click", () => void this.submit());
    mainCol.appendChild(submit);
    screen.appendChild(mainCol);
    this.root.appendChild(screen);
  }

  private judge(docId: string, value: 0 | 1): void {
    this.judgments.judge(docId, value);
    this.renderSession();
  }

  private async submit(): Promise<void> {
    const snapshot = this.snapshot;
    if (!snapshot || !this.judgments.complete || this.submitting) return;
    this.submitting = true;
    try {
      const next = await this.api.submitLabels(snapshot.session_id, this.judgments.toLabels());
      this.applySnapshot(next);
    } catch (err) {
      if (err instanceof ServiceError &&
          ["SessionFinished", "UnknownIds", "PartialLabels"].includes(err.code)) {
        // client drifted from the service's pending batch: resync from truth
        this.applySnapshot(await this.api.getSession(snapshot.session_id));
        return;
      }
      this.renderError(err, () => {
        this.renderSession();
        void this.submit();
      });
    } finally {
      this.submitting = false;
    }
  }

  private onKey(event: KeyboardEvent): void {
    if (!this.snapshot || this.snapshot.status === "finished") return;
    if (event.target instanceof HTMLInputElement) return;
    switch (event.key) {
      case "r":
      case "1":
        this.judgments.judgeCurrent(1);
        break;
      case "n":
      case "0":
        this.judgments.judgeCurrent(0);
        break;
      case "j":
      case "ArrowDown":
        this.judgments.move(1);
        break;
      case "k":
      case "ArrowUp":
        this.judgments.move(-1);
        break;
      case "Enter":
        void this.submit();
        return;
      default:
        return;
    }
    event.preventDefault();
    this.renderSession();
  }

  // ---- summary screen ------------------------------------------------------

  private renderSummary(): void {
    const snapshot = this.snapshot;
    if (!snapshot) return;
    this.root.textContent = "";
    const screen = el("div", "screen summary-screen");
    screen.appendChild(el("h1", "", "session finished"));
    screen.appendChild(el("p", "summary-line",
      `${snapshot.reviewed} documents reviewed, ${snapshot.relevant_found} relevant found.`));
    screen.appendChild(foundSparkline(snapshot.found_curve, 440, 96));
    const download = el("a", "btn-download", "download trajectory (tsv)");
    download.href = this.api.trajectoryUrl(snapshot.session_id);
    download.setAttribute("download", `trajectory-${snapshot.session_id}.tsv`);
    screen.appendChild(download);
    const restart = el("button", "btn-restart", "start another session");
    restart.addEventListener("click", () => {
      this.storage.removeItem(STORAGE_KEY);
      this.snapshot = null;
      void this.renderStart();
    });
    screen.appendChild(restart);
    this.root.appendChild(screen);
  }

  private renderError(err: unknown, retry: () => void): void {
    const message = err instanceof ServiceError
      ? `${err.code}: ${err.detail}`
      : String(err);
    const retryable = err instanceof ServiceError ? err.retryable : true;
    const existing = this.root.querySelector(".error-banner");
    existing?.remove();
    this.root.prepend(errorBanner(message, retryable, () => {
      this.root.querySelector(".error-banner")?.remove();
      retry();
    }));
  }
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  const row = el("label", "form-row");
  row.appendChild(el("span", "form-label", text));
  row.appendChild(control);
  return row;
}
