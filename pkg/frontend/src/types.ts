// Wire types mirroring the search service JSON. The console never invents
// numbers: everything rendered comes straight from these payloads.

export interface SearchRequest {
  query: string;
  top_n?: number;
  alpha?: number;
  beta?: number;
  k?: number;
  include_breakdown?: boolean;
}

export interface ResultRow {
  doc_id: string;
  title: string;
  url: string;
  rsv: number;
  degraded: boolean;
  t_raw?: number;
  t_norm?: number;
  f?: number;
  stance?: number | null;
  similarity?: number | null;
}

export interface GenTextSentence {
  text: string;
  citations: string[];
  valid: boolean;
}

export interface GenTextPayload {
  origin: "generated" | "fallback";
  word_count: number;
  sentences: GenTextSentence[];
  warnings: string[];
}

export interface SearchParams {
  k: number;
  alpha: number;
  beta: number;
  d_ne: number;
}

export interface SearchResponse {
  query: string;
  results: ResultRow[];
  gentext: GenTextPayload | null;
  params: SearchParams;
  timings_ms: Record<string, number>;
  warnings: string[];
}

export interface ConfigPayload {
  k: number;
  alpha: number;
  beta: number;
  d_ne: number;
  lambda: number;
  candidate_pool: number;
  word_limit: number;
  top_n: number;
  providers: Record<string, string>;
}

export interface DocumentPayload {
  doc_id: string;
  title: string;
  url: string;
  text: string;
  dataset: string;
}
