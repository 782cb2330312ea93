import { ApiClient, ApiError } from "./api.js";
import {
  DEFAULT_OPTIONS,
  type QueryOptions,
  type QueryResponse,
  type Reference,
} from "./types.js";

// One chat turn's lifecycle. References always render in the order the
// server ranked them; feedback can be sent at most once per turn.

type FeedbackState = "idle" | "sending" | "recorded";

interface Turn {
  question: string;
  options: QueryOptions;
  element: HTMLElement;
  body: HTMLElement;
  response: QueryResponse | null;
  feedbackState: FeedbackState;
}

export interface ChatApp {
  /** Submit programmatically; resolves when the turn settles. */
  submit(question: string): Promise<void>;
  readonly pending: boolean;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function numberInput(
  testId: string,
  value: number,
  step: string,
  min: string,
): HTMLInputElement {
  const input = el("input");
  input.type = "number";
  input.step = step;
  input.min = min;
  input.value = String(value);
  input.dataset.testid = testId;
  return input;
}

export function createChatApp(root: HTMLElement, client: ApiClient): ChatApp {
  root.innerHTML = "";

  const log = el("main", "chat-log");
  log.dataset.testid = "log";

  const form = el("form", "composer");
  const input = el("input", "composer-input");
  input.type = "text";
  input.placeholder = "Ask a question about the documents";
  input.dataset.testid = "question";
  const send = el("button", "composer-send", "Send");
  send.type = "submit";
  send.dataset.testid = "send";

  const advanced = el("details", "advanced");
  advanced.appendChild(el("summary", "", "Advanced retrieval options"));
  const kInput = numberInput("opt-k", DEFAULT_OPTIONS.k, "1", "1");
  const thresholdInput = numberInput(
    "opt-threshold",
    DEFAULT_OPTIONS.threshold,
    "0.05",
    "0",
  );
  const qInput = numberInput("opt-q", DEFAULT_OPTIONS.q, "1", "2");
  for (const [label, field] of [
    ["top-k", kInput],
    ["distance threshold", thresholdInput],
    ["influence bins q", qInput],
  ] as const) {
    const row = el("label", "advanced-row", `${label} `);
    row.appendChild(field);
    advanced.appendChild(row);
  }

  form.append(input, send);
  root.append(log, advanced, form);

  let pending = false;

  function readOptions(): QueryOptions {
    return {
      k: Number(kInput.value) || DEFAULT_OPTIONS.k,
      threshold:
        thresholdInput.value === ""
          ? DEFAULT_OPTIONS.threshold
          : Number(thresholdInput.value),
      q: Number(qInput.value) || DEFAULT_OPTIONS.q,
    };
  }

  function syncSendState(): void {
    send.disabled = pending || input.value.trim() === "";
  }

  function renderPending(turn: Turn): void {
    turn.body.innerHTML = "";
    turn.body.appendChild(el("div", "bubble answer pending", "thinking..."));
  }

  function renderError(turn: Turn, error: unknown): void {
    turn.body.innerHTML = "";
    const bubble = el("div", "bubble error");
    bubble.dataset.testid = "error-turn";
    const message =
      error instanceof ApiError
        ? error.message
        : "something went wrong on this turn";
    bubble.appendChild(el("p", "error-message", message));
    const retryable = !(error instanceof ApiError) || error.retryable;
    if (retryable) {
      const retry = el("button", "retry", "Retry");
      retry.type = "button";
      retry.dataset.testid = "retry";
      retry.addEventListener("click", () => {
        void runTurn(turn);
      });
      bubble.appendChild(retry);
    }
    turn.body.appendChild(bubble);
  }

  function referenceChip(reference: Reference): HTMLElement {
    const chip = el("li", "reference");
    chip.dataset.testid = "reference";
    chip.appendChild(
      el("span", "reference-id", `${reference.chunk_id}`),
    );
    chip.appendChild(el("span", "reference-snippet", reference.snippet));
    // scores shown exactly as served, no client-side math or rounding
    const cosine = el("span", "badge badge-cosine", `cos ${reference.cosine}`);
    cosine.dataset.testid = "badge-cosine";
    const influence = el(
      "span",
      "badge badge-qim",
      `qim ${reference.qim_score === null ? "n/a" : reference.qim_score}`,
    );
    influence.dataset.testid = "badge-qim";
    chip.append(cosine, influence);
    return chip;
  }

  function feedbackControl(turn: Turn): HTMLElement {
    const box = el("div", "feedback");
    box.dataset.testid = "feedback";
    box.appendChild(el("span", "feedback-label", "Rate this answer:"));
    const buttons: HTMLButtonElement[] = [];
    for (let rating = 1; rating <= 5; rating++) {
      const button = el("button", "feedback-rating", String(rating));
      button.type = "button";
      button.dataset.testid = `rate-${rating}`;
      button.addEventListener("click", () => {
        void sendFeedback(turn, rating, box, buttons);
      });
      buttons.push(button);
      box.appendChild(button);
    }
    const note = el("span", "feedback-note", "");
    note.dataset.testid = "feedback-note";
    box.appendChild(note);
    return box;
  }

  async function sendFeedback(
    turn: Turn,
    rating: number,
    box: HTMLElement,
    buttons: HTMLButtonElement[],
  ): Promise<void> {
    if (turn.feedbackState !== "idle" || turn.response === null) return;
    turn.feedbackState = "sending";
    buttons.forEach((b) => (b.disabled = true));
    const note = box.querySelector<HTMLElement>("[data-testid=feedback-note]")!;
    note.textContent = "";
    try {
      await client.feedback({
        question: turn.response.question,
        final_answer: turn.response.final_answer,
        reference_chunk_ids: turn.response.references.map((r) => r.chunk_id),
        rating,
      });
      turn.feedbackState = "recorded";
      box.innerHTML = "";
      const recorded = el("span", "feedback-recorded", "feedback recorded");
      recorded.dataset.testid = "feedback-recorded";
      box.appendChild(recorded);
    } catch (error) {
      turn.feedbackState = "idle";
      buttons.forEach((b) => (b.disabled = false));
      note.textContent =
        error instanceof ApiError
          ? error.message
          : "could not record feedback";
    }
  }

  function renderAnswer(turn: Turn, response: QueryResponse): void {
    turn.response = response;
    turn.body.innerHTML = "";
    const bubble = el("div", "bubble answer");
    bubble.dataset.testid = "answer-turn";
    const text =
      response.final_answer !== ""
        ? response.final_answer
        : `(${response.outcome})`;
    bubble.appendChild(el("p", "answer-text", text));
    if (response.degraded) {
      bubble.appendChild(
        el("p", "degraded-note", "partial answer: a model was unavailable"),
      );
    }
    if (response.references.length > 0) {
      const list = el("ul", "references");
      list.dataset.testid = "references";
      for (const reference of response.references) {
        list.appendChild(referenceChip(reference));
      }
      bubble.appendChild(list);
    }
    bubble.appendChild(feedbackControl(turn));
    turn.body.appendChild(bubble);
  }

  async function runTurn(turn: Turn): Promise<void> {
    if (pending) return;
    pending = true;
    syncSendState();
    renderPending(turn);
    try {
      const response = await client.query(turn.question, turn.options);
      renderAnswer(turn, response);
    } catch (error) {
      renderError(turn, error);
    } finally {
      pending = false;
      syncSendState();
    }
  }

  async function submit(question: string): Promise<void> {
    const trimmed = question.trim();
    if (trimmed === "" || pending) return;
    const turn: Turn = {
      question: trimmed,
      options: readOptions(),
      element: el("section", "turn"),
      body: el("div", "turn-body"),
      response: null,
      feedbackState: "idle",
    };
    const asked = el("div", "bubble question", trimmed);
    asked.dataset.testid = "question-turn";
    turn.element.append(asked, turn.body);
    log.appendChild(turn.element);
    await runTurn(turn);
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const value = input.value;
    input.value = "";
    syncSendState();
    void submit(value);
  });
  input.addEventListener("input", syncSendState);
  syncSendState();

  return {
    submit,
    get pending() {
      return pending;
    },
  };
}
