import { ApiError, RequestGate, SearchClient, debounce } from "./api.js";
import type { Handlers } from "./render.js";
import { renderApp } from "./render.js";
import {
  closeDetail,
  completeSearch,
  failDocument,
  failSearch,
  initialState,
  installDocument,
  selectDoc,
  setWeights,
  startSearch,
  type ViewState,
} from "./state.js";

export interface AppOptions {
  /** debounce for slider-driven re-ranking, ms */
  debounceMs?: number;
  baseUrl?: string;
}

/**
 * The console controller: owns the state, talks to the service, re-renders
 * on every transition. Slider moves are debounced and serialized through a
 * request gate so at most one search is in flight and stale responses are
 * dropped.
 */
export class App {
  readonly client: SearchClient;
  state: ViewState;
  private root: HTMLElement;
  private gate = new RequestGate();
  private handlers: Handlers;
  private debouncedReRank: () => void;

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.root = root;
    this.client = new SearchClient(options.baseUrl ?? "");
    this.state = initialState();
    this.debouncedReRank = debounce(() => {
      void this.runSearch(this.state.query);
    }, options.debounceMs ?? 250);
    this.handlers = {
      onSubmit: (query) => void this.submit(query),
      onWeights: (alpha, beta) => this.adjustWeights(alpha, beta),
      onInspect: (docId) => void this.inspect(docId),
      onCloseDetail: () => this.update(closeDetail(this.state)),
      onRetry: () => void this.submit(this.state.query),
    };
  }

  private update(next: ViewState): void {
    this.state = next;
    renderApp(this.root, this.state, this.handlers, this.client);
  }

  /** Pull defaults (alpha, beta, provider modes) from the service. */
  async boot(): Promise<void> {
    try {
      const config = await this.client.fetchConfig();
      this.update({
        ...this.state,
        alpha: config.alpha,
        beta: config.beta,
        kbMode: config.providers["knowledge_base"] ?? "double",
      });
    } catch {
      this.update(this.state); // render with built-in defaults
    }
  }

  async submit(query: string): Promise<void> {
    if (!query.trim()) return;
    await this.runSearch(query.trim());
  }

  /** Clamp, re-render the slider labels, and schedule a debounced re-rank. */
  adjustWeights(alpha: number, beta: number): void {
    this.state = setWeights(this.state, alpha, beta);
    if (this.state.response) this.debouncedReRank();
  }

  /** Immediate (non-debounced) weight change; used by tests and keyboard. */
  async setWeightsNow(alpha: number, beta: number): Promise<void> {
    this.state = setWeights(this.state, alpha, beta);
    if (this.state.response) await this.runSearch(this.state.query);
  }

  private async runSearch(query: string): Promise<void> {
    const { id, signal } = this.gate.begin();
    this.update(startSearch(this.state, query));
    try {
      const response = await this.client.search(
        {
          query,
          top_n: 10,
          alpha: this.state.alpha,
          beta: this.state.beta,
          include_breakdown: true,
        },
        signal,
      );
      if (!this.gate.isCurrent(id)) return; // superseded while in flight
      this.update(completeSearch(this.state, response));
    } catch (error) {
      if (!this.gate.isCurrent(id)) return;
      if (error instanceof DOMException && error.name === "AbortError") return;
      const message =
        error instanceof ApiError
          ? error.message
          : "the search service is unreachable";
      this.update(failSearch(this.state, message));
    }
  }

  async inspect(docId: string): Promise<void> {
    this.update(selectDoc(this.state, docId));
    try {
      const doc = await this.client.fetchDocument(docId);
      this.update(installDocument(this.state, doc));
    } catch (error) {
      const message =
        error instanceof ApiError && error.status === 404
          ? "this document is not stored in the index"
          : "could not load the document";
      this.update(failDocument(this.state, docId, message));
    }
  }
}
