import type { DocumentPayload, SearchResponse } from "./types.js";

export interface ViewState {
  query: string;
  response: SearchResponse | null;
  alpha: number;
  beta: number;
  selectedDoc: string | null;
  selectedDocument: DocumentPayload | null;
  detailError: string | null;
  loading: boolean;
  error: string | null; // retryable banner text
  /** rank movement per doc_id vs the previous response (+ = moved up) */
  deltas: Record<string, number>;
  kbMode: string;
}

export function initialState(): ViewState {
  return {
    query: "",
    response: null,
    alpha: 0.65,
    beta: 0.45,
    selectedDoc: null,
    selectedDocument: null,
    detailError: null,
    loading: false,
    error: null,
    deltas: {},
    kbMode: "double",
  };
}

const clamp01 = (x: number) => Math.min(1, Math.max(0, x));

export function setWeights(state: ViewState, alpha: number, beta: number): ViewState {
  return { ...state, alpha: clamp01(alpha), beta: clamp01(beta) };
}

export function startSearch(state: ViewState, query: string): ViewState {
  return { ...state, query, loading: true, error: null };
}

/**
 * Install a response. The rendered order is always exactly the response
 * order; the only derived data is the rank-movement indicator, computed by
 * comparing positions against the previous response.
 */
export function completeSearch(state: ViewState, response: SearchResponse): ViewState {
  const deltas: Record<string, number> = {};
  if (state.response && state.response.query === response.query) {
    const before = new Map(state.response.results.map((r, i) => [r.doc_id, i]));
    response.results.forEach((row, position) => {
      const previous = before.get(row.doc_id);
      if (previous !== undefined) deltas[row.doc_id] = previous - position;
    });
  }
  const stillVisible =
    state.selectedDoc !== null &&
    response.results.some((r) => r.doc_id === state.selectedDoc);
  return {
    ...state,
    response,
    deltas,
    loading: false,
    error: null,
    selectedDoc: stillVisible ? state.selectedDoc : null,
    selectedDocument: stillVisible ? state.selectedDocument : null,
    detailError: stillVisible ? state.detailError : null,
  };
}

export function failSearch(state: ViewState, message: string): ViewState {
  return { ...state, loading: false, error: message };
}

export function selectDoc(state: ViewState, docId: string): ViewState {
  return { ...state, selectedDoc: docId, selectedDocument: null, detailError: null };
}

export function installDocument(state: ViewState, doc: DocumentPayload): ViewState {
  if (state.selectedDoc !== doc.doc_id) return state; // stale fetch
  return { ...state, selectedDocument: doc, detailError: null };
}

export function failDocument(state: ViewState, docId: string, message: string): ViewState {
  if (state.selectedDoc !== docId) return state;
  return { ...state, selectedDocument: null, detailError: message };
}

export function closeDetail(state: ViewState): ViewState {
  return { ...state, selectedDoc: null, selectedDocument: null, detailError: null };
}
