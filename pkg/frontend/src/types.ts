// Wire types for the qimrag service. Scores are display-only here:
// the client never recomputes or reorders what the server ranked.

export interface QueryOptions {
  k: number;
  threshold: number;
  q: number;
}

export interface Reference {
  chunk_id: string;
  doc_id: string;
  snippet: string;
  cosine: number;
  distance: number;
  qim_score: number | null;
}

export interface QueryResponse {
  question: string;
  answer1: string;
  answer2: string;
  final_answer: string;
  outcome: string;
  degraded: boolean;
  references: Reference[];
  timings: Record<string, number>;
}

export interface FeedbackRequest {
  question: string;
  final_answer: string;
  reference_chunk_ids: string[];
  rating: number;
  comment?: string;
}

export interface FeedbackResponse {
  id: string;
}

export const DEFAULT_OPTIONS: QueryOptions = { k: 4, threshold: 0.2, q: 16 };
