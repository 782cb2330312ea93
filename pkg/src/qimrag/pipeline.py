"""Question answering over a vector collection with a quantized-influence
judge.

Flow: embed the question, take the cosine top-k, drop results beyond the
distance threshold, rerank survivors by their quantized influence score
against the query, then ask two generators: the fine-tuned one sees the
raw question (answer 2), the foundational one sees a combined prompt
holding the retrieved text (answer 1) and answer 2. Generator failures
degrade the response instead of failing it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .providers import ProviderError, ProviderSet
from .similarity import qim
from .store import Collection, RankedResult, filter_by_distance, query_topk
from .store import rerank_with

COMBINE_PROMPT_VERSION = "combine-v1"

ANSWER1_MAX_CHARS = 4000

OUTCOME_OK = "ok"
OUTCOME_NO_RELEVANT_CONTENT = "no-relevant-content"


@dataclass(frozen=True)
class PipelineOptions:
    k: int = 4
    threshold: float = 0.2
    q: int = 16
    min_qim: float | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.min_qim is not None and self.min_qim < 0:
            raise ValueError("min_qim must be >= 0 when set")


@dataclass(frozen=True)
class Reference:
    chunk_id: str
    cosine: float
    qim_score: float


@dataclass(frozen=True)
class PipelineAnswer:
    question: str
    answer1: str
    answer2: str
    final_answer: str
    results: tuple[RankedResult, ...]
    timings: dict[str, float] = field(repr=False)
    outcome: str = OUTCOME_OK
    degraded: bool = False

    @property
    def references(self) -> list[Reference]:
        return [
            Reference(r.chunk_id, r.cosine, r.qim_score) for r in self.results
        ]


def judge_rerank(query_embedding, results: list[RankedResult],
                 q: int) -> list[RankedResult]:
    """Score each result by qim(query, candidate) and sort by it.

    Descending score; ties fall back to cosine descending, then chunk_id.
    The output is a permutation of the input.
    """
    scores = [
        qim(query_embedding, r.chunk.embedding, q=q) for r in results
    ]
    return rerank_with(results, scores)


def compose_combined_prompt(question: str, answer1: str,
                            answer2: str) -> str:
    """Build the foundational model's prompt from both answer sources.

    The template is versioned so downstream tests can pin exact bytes;
    empty context blocks render as "[unavailable]".
    """
    if not question:
        raise ValueError("question must be nonempty")
    return (
        f"[{COMBINE_PROMPT_VERSION}] Answer the user's question using the "
        "two context blocks below.\n"
        f"Question: {question}\n"
        "Context A (retrieved):\n"
        f"{answer1 or '[unavailable]'}\n"
        "Context B (fine-tuned model):\n"
        f"{answer2 or '[unavailable]'}\n"
        "Respond with one consolidated answer grounded in the contexts."
    )


def _concatenate_texts(results: list[RankedResult]) -> str:
    """Join reference texts in judge order, capped at chunk boundaries.

    The first chunk is always included so a nonempty reference set never
    yields an empty answer1.
    """
    parts: list[str] = []
    total = 0
    for result in results:
        text = result.chunk.text
        cost = len(text) if not parts else len(text) + 2
        if parts and total + cost > ANSWER1_MAX_CHARS:
            break
        parts.append(text)
        total += cost
    return "\n\n".join(parts)


def answer(question: str, collection: Collection, providers: ProviderSet,
           options: PipelineOptions | None = None) -> PipelineAnswer:
    """Run the full retrieval-and-generation flow for one question."""
    if not question:
        raise ValueError("question must be nonempty")
    options = options or PipelineOptions()
    timings: dict[str, float] = {}

    start = time.perf_counter()
    query = providers.embedder.embed(question, collection.dimension)
    timings["embed"] = time.perf_counter() - start

    if query.degenerate:
        return PipelineAnswer(
            question=question, answer1="", answer2="", final_answer="",
            results=(), timings=timings,
            outcome=OUTCOME_NO_RELEVANT_CONTENT,
        )

    start = time.perf_counter()
    candidates = query_topk(collection, query.values, options.k)
    survivors = filter_by_distance(candidates, options.threshold)
    timings["retrieve"] = time.perf_counter() - start

    if survivors:
        start = time.perf_counter()
        survivors = judge_rerank(query.values, survivors, options.q)
        if options.min_qim is not None:
            survivors = [
                r for r in survivors if r.qim_score >= options.min_qim
            ]
        timings["rerank"] = time.perf_counter() - start

    if not survivors:
        return PipelineAnswer(
            question=question, answer1="", answer2="", final_answer="",
            results=(), timings=timings,
            outcome=OUTCOME_NO_RELEVANT_CONTENT,
        )

    answer1 = _concatenate_texts(survivors)
    degraded = False

    start = time.perf_counter()
    try:
        answer2 = providers.finetuned.generate(question)
    except ProviderError:
        answer2 = ""
        degraded = True
    timings["finetuned"] = time.perf_counter() - start

    prompt = compose_combined_prompt(question, answer1, answer2)
    start = time.perf_counter()
    try:
        final_answer = providers.foundational.generate(prompt)
    except ProviderError:
        final_answer = answer1
        degraded = True
    timings["foundational"] = time.perf_counter() - start

    return PipelineAnswer(
        question=question,
        answer1=answer1,
        answer2=answer2,
        final_answer=final_answer,
        results=tuple(survivors),
        timings=timings,
        outcome=OUTCOME_OK,
        degraded=degraded,
    )
