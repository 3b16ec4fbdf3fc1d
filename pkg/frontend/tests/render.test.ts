import { beforeEach, describe, expect, it, vi } from "vitest";

import { SearchClient } from "../src/api.js";
import type { Handlers } from "../src/render.js";
import { fmt, renderApp } from "../src/render.js";
import { completeSearch, initialState, selectDoc, type ViewState } from "../src/state.js";
import type { SearchResponse } from "../src/types.js";

const RESPONSE: SearchResponse = {
  query: "can 5g antennas cause covid 19",
  // deliberately not sorted by rsv: the UI must trust the response order
  results: [
    {
      doc_id: "web002", title: "Hidden truth", url: "http://x/2",
      rsv: 0.5221, degraded: false,
      t_norm: 1.0, f: 0.1311, stance: 0.0246, similarity: 0.3291,
    },
    {
      doc_id: "web001", title: "No evidence", url: "http://x/1",
      rsv: 0.6704, degraded: true,
      t_norm: 0.7582, f: 0.5986, stance: null, similarity: 0.7432,
    },
  ],
  gentext: {
    origin: "generated",
    word_count: 45,
    sentences: [
      { text: "First finding.", citations: ["10316077"], valid: true },
      { text: "Second finding.", citations: ["10288941"], valid: true },
      { text: "Unsourced claim.", citations: ["99999"], valid: false },
    ],
    warnings: [],
  },
  params: { k: 10, alpha: 0.65, beta: 0.45, d_ne: 0.7 },
  timings_ms: {},
  warnings: [],
};

function handlers(overrides: Partial<Handlers> = {}): Handlers {
  return {
    onSubmit: vi.fn(),
    onWeights: vi.fn(),
    onInspect: vi.fn(),
    onCloseDetail: vi.fn(),
    onRetry: vi.fn(),
    ...overrides,
  };
}

let root: HTMLElement;
const client = new SearchClient("http://svc");

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
});

function renderedState(): ViewState {
  return completeSearch(initialState(), RESPONSE);
}

describe("result list", () => {
  it("renders rows in response order, never re-sorting", () => {
    renderApp(root, renderedState(), handlers(), client);
    const ids = [...root.querySelectorAll('[data-testid="result"]')].map(
      (node) => node.getAttribute("data-doc-id"),
    );
    expect(ids).toEqual(["web002", "web001"]);
  });

  it("every displayed number equals a response field", () => {
    renderApp(root, renderedState(), handlers(), client);
    const rows = [...root.querySelectorAll('[data-testid="result"]')];
    RESPONSE.results.forEach((row, i) => {
      expect(rows[i].querySelector('[data-testid="rsv-value"]')!.textContent)
        .toBe(fmt(row.rsv));
      expect(rows[i].querySelector('[data-testid="t-norm-value"]')!.textContent)
        .toBe(fmt(row.t_norm));
      expect(rows[i].querySelector('[data-testid="f-score-value"]')!.textContent)
        .toBe(fmt(row.f));
    });
  });

  it("marks degraded documents", () => {
    renderApp(root, renderedState(), handlers(), client);
    const rows = [...root.querySelectorAll('[data-testid="result"]')];
    expect(rows[0].querySelector('[data-testid="degraded-badge"]')).toBeNull();
    expect(rows[1].querySelector('[data-testid="degraded-badge"]')).not.toBeNull();
  });

  it("shows rank movement after a re-rank of the same query", () => {
    let state = renderedState();
    const reordered: SearchResponse = {
      ...RESPONSE,
      results: [RESPONSE.results[1], RESPONSE.results[0]],
    };
    state = completeSearch(state, reordered);
    renderApp(root, state, handlers(), client);
    const deltas = [...root.querySelectorAll('[data-testid="delta"]')].map(
      (node) => node.textContent,
    );
    expect(deltas).toEqual(["▲1", "▼1"]);
  });

  it("clicking a title inspects the document", () => {
    const h = handlers();
    renderApp(root, renderedState(), h, client);
    (root.querySelector('[data-testid="result-title"]') as HTMLElement).click();
    expect(h.onInspect).toHaveBeenCalledWith("web002");
  });
});

describe("gentext panel", () => {
  it("links every citation and flags unresolved ones", () => {
    renderApp(root, renderedState(), handlers(), client);
    const links = [...root.querySelectorAll('[data-testid="citation-link"]')];
    expect(links.length).toBe(3);
    expect((links[0] as HTMLAnchorElement).href)
      .toBe("http://svc/api/kb/article/10316077");
    expect(root.querySelectorAll('[data-testid="invalid-citation"]').length).toBe(1);
  });

  it("uses outbound archive links when the knowledge base is remote", () => {
    const state = { ...renderedState(), kbMode: "remote" };
    renderApp(root, state, handlers(), client);
    const link = root.querySelector('[data-testid="citation-link"]') as HTMLAnchorElement;
    expect(link.href).toBe("https://www.ncbi.nlm.nih.gov/pmc/articles/PMC10316077/");
  });

  it("explains topicality-only mode when no evidence came back", () => {
    const state = completeSearch(initialState(), { ...RESPONSE, gentext: null });
    renderApp(root, state, handlers(), client);
    const panel = root.querySelector('[data-testid="gentext-panel"]')!;
    expect(panel.textContent).toContain("topical match only");
  });
});

describe("query form", () => {
  it("disables submit while the input is empty", () => {
    renderApp(root, initialState(), handlers(), client);
    const input = root.querySelector('[data-testid="query-input"]') as HTMLInputElement;
    const submit = root.querySelector('[data-testid="submit"]') as HTMLButtonElement;
    expect(submit.disabled).toBe(true);
    input.value = "flu shots";
    input.dispatchEvent(new Event("input"));
    expect(submit.disabled).toBe(false);
    input.value = "   ";
    input.dispatchEvent(new Event("input"));
    expect(submit.disabled).toBe(true);
  });

  it("renders a retryable banner on failure", () => {
    const h = handlers();
    renderApp(root, { ...initialState(), error: "service down" }, h, client);
    const banner = root.querySelector('[data-testid="error-banner"]')!;
    expect(banner.textContent).toContain("service down");
    (banner.querySelector('[data-testid="retry"]') as HTMLElement).click();
    expect(h.onRetry).toHaveBeenCalled();
  });
});

describe("detail pane", () => {
  it("shows the fusion formulae instantiated with response numbers", () => {
    const state = selectDoc(renderedState(), "web001");
    renderApp(root, state, handlers(), client);
    const rsvFormula = root.querySelector('[data-testid="rsv-formula"]')!.textContent!;
    expect(rsvFormula).toContain(fmt(0.45));   // params.beta
    expect(rsvFormula).toContain(fmt(0.7582)); // row.t_norm
    expect(rsvFormula).toContain(fmt(0.5986)); // row.f
    expect(rsvFormula).toContain(`= ${fmt(0.6704)}`); // response rsv, not computed
    const fFormula = root.querySelector('[data-testid="f-formula"]')!.textContent!;
    expect(fFormula).toContain(fmt(0.65));
    expect(fFormula).toContain("-"); // missing stance renders as "-"
  });

  it("close button returns to the plain list", () => {
    const h = handlers();
    const state = selectDoc(renderedState(), "web001");
    renderApp(root, state, h, client);
    (root.querySelector('[data-testid="close-detail"]') as HTMLElement).click();
    expect(h.onCloseDetail).toHaveBeenCalled();
  });

  it("renders the inline message when the document fetch 404s", () => {
    const state = {
      ...selectDoc(renderedState(), "web001"),
      detailError: "this document is not stored in the index",
    };
    renderApp(root, state, handlers(), client);
    expect(root.querySelector('[data-testid="detail-error"]')!.textContent)
      .toContain("not stored");
  });
});
