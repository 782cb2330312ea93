"""HTTP service wiring the full loop: ingest documents, answer queries
with judge-reranked references, record feedback, and export training data.

State lives in one cache directory: the vector collection (write-through
file), an append-only feedback log, and a JSON map of ingested content
hashes for idempotence. A service instance owns a single collection.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .corpus import fixture_corpus_dir, load_corpus
from .dataset import (
    DEFAULT_MAX_CHARS,
    DEFAULT_OVERLAP_CHARS,
    DatasetBundle,
    chunk_text,
    format_guanaco_line,
    generate_qa,
    merge_feedback,
    split_dataset,
)
from .feedback import FeedbackLog, make_feedback
from .pipeline import PipelineAnswer, PipelineOptions, answer
from .providers import ProviderError, ProviderSet, load_provider_set
from .similarity import DimensionMismatchError
from .store import (
    ChunkRecord,
    Collection,
    create_collection,
    load,
    remove,
    upsert,
)

DEFAULT_DIMENSION = 64
DEFAULT_COLLECTION_NAME = "main"
SNIPPET_CHARS = 200


@dataclass
class ServiceConfig:
    cache_dir: Path
    providers: ProviderSet
    corpus_dir: Path | None = None
    collection_name: str = DEFAULT_COLLECTION_NAME
    dimension: int = DEFAULT_DIMENSION
    max_chars: int = DEFAULT_MAX_CHARS
    overlap_chars: int = DEFAULT_OVERLAP_CHARS
    pairs_per_chunk: int = 2
    split_ratio: float = 0.9
    split_seed: int = 0


class _BadRequest(Exception):
    def __init__(self, detail: str) -> None:
        self.detail = detail


class ServiceState:
    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        config.cache_dir.mkdir(parents=True, exist_ok=True)
        collection_path = config.cache_dir / f"{config.collection_name}.vec"
        if collection_path.exists():
            self.collection = load(collection_path)
        else:
            self.collection = create_collection(
                config.collection_name, config.dimension,
                root=config.cache_dir,
            )
        self.log = FeedbackLog(config.cache_dir / "feedback.log")
        self._hashes_path = config.cache_dir / "ingests.json"
        self.hashes: dict[str, str] = {}
        if self._hashes_path.exists():
            self.hashes = json.loads(
                self._hashes_path.read_text(encoding="utf-8"))

    def _save_hashes(self) -> None:
        tmp = self._hashes_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(self.hashes, sort_keys=True, indent=0),
                       encoding="utf-8")
        os.replace(tmp, self._hashes_path)

    def ingest_document(self, doc_id: str, text: str) -> int:
        """Chunk, embed, and store one document; returns chunks created.

        Re-ingesting identical content is a no-op; changed content
        replaces the document's previous chunks.
        """
        if not doc_id.strip():
            raise _BadRequest("doc_id must be nonempty")
        if not text.strip():
            raise _BadRequest("text must be nonempty")
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        if self.hashes.get(doc_id) == digest:
            return 0
        records = []
        for ordinal, chunk in enumerate(
                chunk_text(doc_id, text, self.config.max_chars,
                           self.config.overlap_chars)):
            embedding = self.config.providers.embedder.embed(
                chunk, self.config.dimension)
            if embedding.degenerate:
                continue
            records.append(ChunkRecord(
                chunk_id=f"{doc_id}:{ordinal}", doc_id=doc_id,
                ordinal=ordinal, text=chunk, embedding=embedding.values,
            ))
        stale = [r.chunk_id for r in self.collection.records()
                 if r.doc_id == doc_id]
        remove(self.collection, stale)
        upsert(self.collection, records)
        self.hashes[doc_id] = digest
        self._save_hashes()
        return len(records)

    def preload_corpus(self, directory: Path) -> None:
        for doc_id, text in load_corpus(directory).items():
            self.ingest_document(doc_id, text)

    def build_training_text(self, min_rating: int) -> str:
        """Generated pairs (train split) plus well-rated feedback pairs."""
        chunks = sorted(
            self.collection.records(),
            key=lambda r: ((0, int(r.doc_id)) if r.doc_id.isdigit()
                           else (1, r.doc_id), r.ordinal),
        )
        pairs = []
        for chunk in chunks:
            result = generate_qa(chunk.text, self.config.providers.qa,
                                 self.config.pairs_per_chunk,
                                 source_doc_id=chunk.doc_id)
            pairs.extend(result.pairs)
        unique = list({p.key: p for p in pairs}.values())
        if len(unique) >= 2:
            bundle = split_dataset(unique, self.config.split_ratio,
                                   self.config.split_seed)
        else:
            bundle = DatasetBundle(train=tuple(unique), test=(),
                                   split_seed=self.config.split_seed,
                                   split_ratio=self.config.split_ratio)
        bundle = merge_feedback(bundle, self.log.records(), min_rating)
        lines = [format_guanaco_line(p) for p in bundle.train]
        return "\n".join(lines) + ("\n" if lines else "")


class IngestBody(BaseModel):
    doc_id: str
    text: str


class QueryOptions(BaseModel):
    k: int = 4
    threshold: float = 0.2
    q: int = 16
    min_qim: float | None = None


class QueryBody(BaseModel):
    question: str
    options: QueryOptions = QueryOptions()


class FeedbackBody(BaseModel):
    question: str
    final_answer: str
    reference_chunk_ids: list[str] = []
    rating: int
    comment: str | None = None


def _wire_answer(result: PipelineAnswer,
                 collection: Collection) -> dict:
    references = []
    for ranked in result.results:
        chunk = ranked.chunk
        references.append({
            "chunk_id": chunk.chunk_id,
            "doc_id": chunk.doc_id,
            "snippet": chunk.text[:SNIPPET_CHARS],
            "cosine": ranked.cosine,
            "distance": ranked.distance,
            "qim_score": ranked.qim_score,
        })
    return {
        "question": result.question,
        "answer1": result.answer1,
        "answer2": result.answer2,
        "final_answer": result.final_answer,
        "outcome": result.outcome,
        "degraded": result.degraded,
        "references": references,
        "timings": result.timings,
    }


def create_app(config: ServiceConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="retrieval service")
    app.state.service = state
    # The browser UI is served from a different origin than this API.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request,
                                  exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"detail": "malformed body"})

    @app.exception_handler(_BadRequest)
    async def _bad_request_handler(request: Request, exc: _BadRequest):
        return JSONResponse(status_code=400,
                            content={"detail": exc.detail})

    @app.post("/ingest")
    def ingest(body: IngestBody):
        try:
            created = state.ingest_document(body.doc_id, body.text)
        except DimensionMismatchError as exc:
            return JSONResponse(status_code=409,
                                content={"detail": str(exc)})
        except ProviderError as exc:
            return JSONResponse(status_code=502,
                                content={"detail": str(exc)})
        return {"doc_id": body.doc_id, "chunks_created": created}

    @app.post("/query")
    def query(body: QueryBody):
        if not body.question.strip():
            raise _BadRequest("question must be nonempty")
        if len(state.collection) == 0:
            return JSONResponse(status_code=404,
                                content={"detail": "collection is empty"})
        try:
            options = PipelineOptions(
                k=body.options.k, threshold=body.options.threshold,
                q=body.options.q, min_qim=body.options.min_qim,
            )
        except ValueError as exc:
            raise _BadRequest(f"bad options: {exc}") from exc
        try:
            result = answer(body.question, state.collection,
                            config.providers, options)
        except ProviderError as exc:
            return JSONResponse(status_code=502,
                                content={"detail": str(exc)})
        payload = _wire_answer(result, state.collection)
        if result.degraded:
            return JSONResponse(status_code=502, content=payload)
        return payload

    @app.post("/feedback")
    def feedback(body: FeedbackBody):
        try:
            record = make_feedback(
                question=body.question,
                final_answer=body.final_answer,
                reference_chunk_ids=body.reference_chunk_ids,
                rating=body.rating,
                comment=body.comment,
            )
        except ValueError as exc:
            raise _BadRequest(str(exc)) from exc
        stored = state.log.append(record)
        return {"id": stored.id}

    @app.get("/export/training")
    def export_training(min_rating: int = 4):
        if not 1 <= min_rating <= 5:
            raise _BadRequest("min_rating must lie in [1, 5]")
        return PlainTextResponse(state.build_training_text(min_rating))

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "collection_size": len(state.collection),
            "providers": config.providers.describe(),
        }

    if config.corpus_dir is not None:
        state.preload_corpus(config.corpus_dir)
    return app


def main(argv: list[str] | None = None) -> int:
    environment = os.environ
    parser = argparse.ArgumentParser(
        prog="ragservice",
        description="Serve retrieval-augmented question answering over "
                    "a document corpus.",
    )
    parser.add_argument("--corpus",
                        default=environment.get("QIMRAG_CORPUS"),
                        help="directory of <doc_id>.txt files to ingest "
                             "at startup (default: bundled fixture corpus)")
    parser.add_argument("--cache",
                        default=environment.get("QIMRAG_CACHE", "cache"),
                        help="cache directory for collection, feedback "
                             "log, and ingest hashes")
    parser.add_argument("--port", type=int,
                        default=int(environment.get("QIMRAG_PORT", "8080")))
    parser.add_argument("--host",
                        default=environment.get("QIMRAG_HOST", "127.0.0.1"))
    parser.add_argument("--providers",
                        default=environment.get("QIMRAG_PROVIDERS"),
                        help="JSON provider config; omit for offline stubs")
    parser.add_argument("--dimension", type=int,
                        default=int(environment.get("QIMRAG_DIMENSION",
                                                    str(DEFAULT_DIMENSION))))
    args = parser.parse_args(argv)

    corpus_dir = Path(args.corpus) if args.corpus else fixture_corpus_dir()
    config = ServiceConfig(
        cache_dir=Path(args.cache),
        providers=load_provider_set(args.providers),
        corpus_dir=corpus_dir,
        dimension=args.dimension,
    )
    app = create_app(config)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
