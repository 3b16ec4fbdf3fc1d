import type {
  ConfigPayload,
  DocumentPayload,
  SearchRequest,
  SearchResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function jsonOrThrow<T>(resp: Response, what: string): Promise<T> {
  if (!resp.ok) {
    let detail = "";
    try {
      const body = await resp.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body);
    } catch {
      detail = resp.statusText;
    }
    throw new ApiError(resp.status, `${what} failed (${resp.status}): ${detail}`);
  }
  return (await resp.json()) as T;
}

export class SearchClient {
  private base: string;

  constructor(base = "") {
    this.base = base.replace(/\/+$/, "");
  }

  async search(request: SearchRequest, signal?: AbortSignal): Promise<SearchResponse> {
    const resp = await fetch(`${this.base}/api/search`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ include_breakdown: true, ...request }),
      signal,
    });
    return jsonOrThrow<SearchResponse>(resp, "search");
  }

  async fetchConfig(): Promise<ConfigPayload> {
    return jsonOrThrow(await fetch(`${this.base}/api/config`), "config");
  }

  async fetchDocument(docId: string): Promise<DocumentPayload> {
    return jsonOrThrow(
      await fetch(`${this.base}/api/document/${encodeURIComponent(docId)}`),
      "document",
    );
  }

  /**
   * Where a citation link should point. With the offline fixture knowledge
   * base the article is viewable locally; otherwise build the outbound
   * scientific-archive URL from the reference id.
   */
  citationUrl(refId: string, kbMode: string): string {
    if (kbMode === "double") {
      return `${this.base}/api/kb/article/${encodeURIComponent(refId)}`;
    }
    return `https://www.ncbi.nlm.nih.gov/pmc/articles/PMC${encodeURIComponent(refId)}/`;
  }
}

/**
 * Serializes requests: beginning a new request aborts the previous one, and
 * responses from superseded requests are identified by id and dropped, so at
 * most one request is in flight and stale responses never repaint the view.
 */
export class RequestGate {
  private latest = 0;
  private controller: AbortController | null = null;

  begin(): { id: number; signal: AbortSignal } {
    this.controller?.abort();
    this.controller = new AbortController();
    this.latest += 1;
    return { id: this.latest, signal: this.controller.signal };
  }

  isCurrent(id: number): boolean {
    return id === this.latest;
  }
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}
