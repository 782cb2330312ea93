import type {
  FeedbackRequest,
  FeedbackResponse,
  QueryOptions,
  QueryResponse,
} from "./types.js";

/** Error from the service or the network layer.
 *
 * `status` is the HTTP status code, or null when the request never got a
 * response (connection refused, DNS, aborted).
 */
export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** Errors worth a retry button: network failures and 5xx. */
  get retryable(): boolean {
    return this.status === null || this.status >= 500;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the two endpoints the UI is allowed to call. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
    } catch (cause) {
      throw new ApiError(`service unreachable: ${String(cause)}`, null);
    }
    if (!response.ok) {
      let detail = "";
      try {
        const parsed = await response.json();
        detail = typeof parsed?.detail === "string" ? parsed.detail : "";
      } catch {
        // non-JSON error body; status alone has to do
      }
      throw new ApiError(
        detail || `request failed with status ${response.status}`,
        response.status,
      );
    }
    return (await response.json()) as T;
  }

  query(question: string, options: QueryOptions): Promise<QueryResponse> {
    return this.post<QueryResponse>("/query", { question, options });
  }

  feedback(body: FeedbackRequest): Promise<FeedbackResponse> {
    return this.post<FeedbackResponse>("/feedback", body);
  }
}
