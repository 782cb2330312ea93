"""Retrieval-augmented answering with influence-score reranking.

The package is organized bottom-up:

- :mod:`qimrag.rng` deterministic pseudo-random streams
- :mod:`qimrag.similarity` cosine and quantized-influence kernels
- :mod:`qimrag.simlab` noise-sweep simulation over the two scores
- :mod:`qimrag.embedding` deterministic hash embeddings
- :mod:`qimrag.store` persistent brute-force vector collections
- :mod:`qimrag.providers` embedder/generator backends (stub or remote)
- :mod:`qimrag.pipeline` retrieve, rerank, and answer composition
- :mod:`qimrag.dataset` chunking, QA pair generation, Guanaco export
- :mod:`qimrag.feedback` durable user-feedback log
- :mod:`qimrag.tuner` coordinate-descent hyperparameter search
- :mod:`qimrag.evalharness` answer scoring and report writing
- :mod:`qimrag.service` HTTP service tying the pieces together
"""

from qimrag.dataset import (
    DatasetBundle,
    QAPair,
    chunk_text,
    export_guanaco,
    format_guanaco_line,
    generate_qa,
    merge_feedback,
    parse_guanaco,
    split_dataset,
)
from qimrag.embedding import Embedding, det_embed
from qimrag.evalharness import (
    EvalRow,
    EvalSummary,
    aggregate,
    round_half_up,
    score_pair,
    write_report,
)
from qimrag.feedback import FeedbackLog, FeedbackRecord, make_feedback
from qimrag.pipeline import (
    PipelineAnswer,
    PipelineOptions,
    Reference,
    answer,
    judge_rerank,
)
from qimrag.providers import (
    ProviderConfig,
    ProviderError,
    ProviderSet,
    default_provider_set,
    load_provider_set,
)
from qimrag.rng import SplitMix64, keyed_stream, mix64
from qimrag.service import ServiceConfig, create_app
from qimrag.similarity import (
    DimensionMismatchError,
    ZeroNormError,
    cosine_distance,
    cosine_similarity,
    iscore_binary,
    iscore_general,
    normalized_iscore,
    qim,
    quantize,
)
from qimrag.store import (
    ChunkRecord,
    Collection,
    RankedResult,
    create_collection,
    filter_by_distance,
    persist,
    query_topk,
    rerank_with,
    upsert,
)
from qimrag.store import load as load_collection
from qimrag.tuner import (
    Objective,
    ParamPoint,
    ParamRanges,
    TuneResult,
    export_trace,
    grid_objective,
    load_loss_grid,
    tune,
)

__version__ = "0.1.0"

__all__ = [
    "ChunkRecord",
    "Collection",
    "DatasetBundle",
    "DimensionMismatchError",
    "Embedding",
    "EvalRow",
    "EvalSummary",
    "FeedbackLog",
    "FeedbackRecord",
    "Objective",
    "ParamPoint",
    "ParamRanges",
    "PipelineAnswer",
    "PipelineOptions",
    "ProviderConfig",
    "ProviderError",
    "ProviderSet",
    "QAPair",
    "RankedResult",
    "Reference",
    "ServiceConfig",
    "SplitMix64",
    "TuneResult",
    "ZeroNormError",
    "aggregate",
    "answer",
    "chunk_text",
    "cosine_distance",
    "cosine_similarity",
    "create_app",
    "create_collection",
    "default_provider_set",
    "det_embed",
    "export_guanaco",
    "export_trace",
    "filter_by_distance",
    "format_guanaco_line",
    "generate_qa",
    "grid_objective",
    "iscore_binary",
    "iscore_general",
    "judge_rerank",
    "keyed_stream",
    "load_collection",
    "load_loss_grid",
    "load_provider_set",
    "make_feedback",
    "merge_feedback",
    "mix64",
    "normalized_iscore",
    "parse_guanaco",
    "persist",
    "qim",
    "quantize",
    "query_topk",
    "rerank_with",
    "round_half_up",
    "score_pair",
    "split_dataset",
    "tune",
    "upsert",
    "write_report",
]
