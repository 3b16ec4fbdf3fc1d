import type { SearchClient } from "./api.js";
import type { ViewState } from "./state.js";
import type { GenTextPayload, ResultRow } from "./types.js";

export interface Handlers {
  onSubmit(query: string): void;
  onWeights(alpha: number, beta: number): void;
  onInspect(docId: string): void;
  onCloseDetail(): void;
  onRetry(): void;
}

/** Every number on screen goes through this; tests compare against it. */
export const fmt = (x: number | null | undefined): string =>
  x === null || x === undefined ? "-" : x.toFixed(4);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function scoreBar(label: string, value: number | undefined, cssClass: string): HTMLElement {
  const width = value === undefined ? 0 : Math.round(value * 1000) / 10;
  const fill = el("span", { class: `bar-fill ${cssClass}` });
  fill.style.width = `${width}%`;
  return el(
    "div",
    { class: "bar" },
    el("span", { class: "bar-label" }, label),
    el("span", { class: "bar-track" }, fill),
    el("span", { class: "bar-value", "data-testid": `${cssClass}-value` }, fmt(value)),
  );
}

function deltaBadge(delta: number | undefined): HTMLElement {
  if (delta === undefined || delta === 0) {
    return el("span", { class: "delta none", "data-testid": "delta" }, "·");
  }
  const up = delta > 0;
  return el(
    "span",
    { class: `delta ${up ? "up" : "down"}`, "data-testid": "delta" },
    `${up ? "▲" : "▼"}${Math.abs(delta)}`,
  );
}

function resultItem(
  row: ResultRow,
  position: number,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const title = el(
    "button",
    { class: "result-title", "data-testid": "result-title" },
    row.title || row.doc_id,
  );
  title.addEventListener("click", () => handlers.onInspect(row.doc_id));
  const badges = el("span", { class: "badges" });
  if (row.degraded) {
    badges.append(el("span", { class: "badge degraded", "data-testid": "degraded-badge" },
                     "provider degraded"));
  }
  const item = el(
    "li",
    { class: "result", "data-testid": "result", "data-doc-id": row.doc_id },
    el("span", { class: "rank" }, String(position)),
    deltaBadge(state.deltas[row.doc_id]),
    title,
    el("span", { class: "doc-id" }, row.doc_id),
    badges,
    el("span", { class: "rsv", "data-testid": "rsv-value" }, fmt(row.rsv)),
    scoreBar("T", row.t_norm, "t-norm"),
    scoreBar("F", row.f, "f-score"),
  );
  if (state.selectedDoc === row.doc_id) item.classList.add("selected");
  return item;
}

function gentextPanel(
  gentext: GenTextPayload | null,
  state: ViewState,
  client: SearchClient,
): HTMLElement {
  const panel = el("section", { class: "gentext", "data-testid": "gentext-panel" });
  panel.append(el("h2", {}, "Why these results: the evidence summary"));
  if (gentext === null) {
    panel.append(el("p", { class: "gentext-empty" },
                    "No scientific evidence was retrieved for this query; ",
                    "results are ranked by topical match only."));
    return panel;
  }
  const origin = gentext.origin === "fallback"
    ? "extractive fallback (generation unavailable)"
    : "generated from retrieved evidence";
  panel.append(el("p", { class: "gentext-meta" },
                  `${origin}, ${gentext.word_count} words`));
  const list = el("div", { class: "gentext-sentences" });
  for (const sentence of gentext.sentences) {
    const line = el("p", { class: "gentext-sentence" }, sentence.text, " ");
    for (const refId of sentence.citations) {
      const link = el(
        "a",
        {
          class: "citation",
          "data-testid": "citation-link",
          href: client.citationUrl(refId, state.kbMode),
          target: "_blank",
          rel: "noopener",
        },
        `[${refId}]`,
      );
      line.append(link, " ");
    }
    if (!sentence.valid) {
      line.classList.add("invalid");
      line.append(el("span", { class: "badge invalid", "data-testid": "invalid-citation" },
                     "unresolved citation"));
    }
    list.append(line);
  }
  panel.append(list);
  return panel;
}

function detailPane(state: ViewState, handlers: Handlers): HTMLElement {
  const pane = el("aside", { class: "detail", "data-testid": "detail-pane" });
  const close = el("button", { class: "close", "data-testid": "close-detail" }, "close");
  close.addEventListener("click", () => handlers.onCloseDetail());
  pane.append(close);

  const row = state.response?.results.find((r) => r.doc_id === state.selectedDoc);
  if (!row) return pane;
  pane.append(el("h2", {}, row.title || row.doc_id));
  if (row.degraded) {
    pane.append(el("p", { class: "badge degraded" },
                   "a provider failed while scoring this document"));
  }

  const params = state.response!.params;
  // Formulae shown with the response's numbers substituted; no value here
  // is computed client side.
  pane.append(
    el("p", { class: "formula", "data-testid": "rsv-formula" },
       `rsv = β·t_norm + (1−β)·f : `
       + `${fmt(params.beta)} × ${fmt(row.t_norm)} `
       + `+ (1 − ${fmt(params.beta)}) × ${fmt(row.f)} = ${fmt(row.rsv)}`),
    el("p", { class: "formula", "data-testid": "f-formula" },
       `f = α·stance + (1−α)·similarity : `
       + `${fmt(params.alpha)} × ${fmt(row.stance)} `
       + `+ (1 − ${fmt(params.alpha)}) × ${fmt(row.similarity)} = ${fmt(row.f)}`),
  );

  if (state.detailError) {
    pane.append(el("p", { class: "detail-error", "data-testid": "detail-error" },
                   state.detailError));
  } else if (state.selectedDocument) {
    const doc = state.selectedDocument;
    if (doc.url) pane.append(el("p", { class: "doc-url" }, doc.url));
    pane.append(el("div", { class: "doc-body", "data-testid": "doc-body" }, doc.text));
  } else {
    pane.append(el("p", { class: "doc-loading" }, "loading document…"));
  }
  return pane;
}

function slider(
  name: "alpha" | "beta",
  value: number,
  onInput: (value: number) => void,
): HTMLElement {
  const input = el("input", {
    type: "range", min: "0", max: "1", step: "0.05",
    value: String(value), "data-testid": `${name}-slider`,
  });
  const label = el("span", { class: "slider-value", "data-testid": `${name}-value` },
                   value.toFixed(2));
  input.addEventListener("input", () => {
    label.textContent = Number(input.value).toFixed(2);
    onInput(Number(input.value));
  });
  const symbol = name === "alpha" ? "α stance weight" : "β topicality weight";
  return el("label", { class: "slider" }, symbol, input, label);
}

export function renderApp(
  root: HTMLElement,
  state: ViewState,
  handlers: Handlers,
  client: SearchClient,
): void {
  root.textContent = "";
  root.className = state.loading ? "loading" : "";

  const input = el("input", {
    type: "search",
    placeholder: "ask a health question…",
    value: state.query,
    "data-testid": "query-input",
  });
  const submit = el("button", { type: "submit", "data-testid": "submit" }, "Search");
  submit.toggleAttribute("disabled", input.value.trim() === "");
  input.addEventListener("input", () => {
    submit.toggleAttribute("disabled", input.value.trim() === "");
  });
  const form = el("form", { class: "query-form" }, input, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (input.value.trim() !== "") handlers.onSubmit(input.value.trim());
  });

  let pendingAlpha = state.alpha;
  let pendingBeta = state.beta;
  const sliders = el(
    "div",
    { class: "sliders" },
    slider("alpha", state.alpha, (value) => {
      pendingAlpha = value;
      handlers.onWeights(pendingAlpha, pendingBeta);
    }),
    slider("beta", state.beta, (value) => {
      pendingBeta = value;
      handlers.onWeights(pendingAlpha, pendingBeta);
    }),
  );

  const header = el("header", {}, el("h1", {}, "evirank"), form, sliders);
  root.append(header);

  if (state.error) {
    const retry = el("button", { "data-testid": "retry" }, "retry");
    retry.addEventListener("click", () => handlers.onRetry());
    root.append(el("div", { class: "banner error", "data-testid": "error-banner" },
                   state.error, " ", retry));
  }

  if (state.response) {
    const main = el("main", { class: state.selectedDoc ? "with-detail" : "" });
    const list = el("ol", { class: "results", "data-testid": "results" });
    state.response.results.forEach((row, index) => {
      list.append(resultItem(row, index + 1, state, handlers));
    });
    if (state.response.results.length === 0) {
      list.append(el("li", { class: "no-results" }, "no matching documents"));
    }
    const left = el("div", { class: "results-column" }, list,
                    gentextPanel(state.response.gentext, state, client));
    main.append(left);
    if (state.selectedDoc) main.append(detailPane(state, handlers));
    root.append(main);
  }
}
