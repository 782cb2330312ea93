"""Embedding and generation providers behind one small abstraction.

Stubs are first-class so every pipeline path is testable offline; remote
providers speak a minimal HTTP POST protocol (JSON body with model and
input). Auth tokens are referenced by environment variable name, never
stored in config files.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from .embedding import Embedding, det_embed

ROLES = ("embedder", "finetuned", "foundational", "qa")

_STUB_EMBEDDERS = ("det",)
_STUB_GENERATORS = ("echo", "qa")

DEFAULT_TIMEOUT = 30.0


class ProviderError(Exception):
    """A provider call failed (network, HTTP status, or bad payload)."""


@dataclass(frozen=True)
class ProviderConfig:
    kind: str  # "embedder" or "generator"
    stub: str | None = None
    base_url: str | None = None
    model: str | None = None
    token_env: str | None = None
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self) -> None:
        if self.kind not in ("embedder", "generator"):
            raise ValueError(f"unknown provider kind: {self.kind!r}")
        remote = self.base_url is not None
        if self.stub is not None and remote:
            raise ValueError("config sets both a stub and a remote endpoint")
        if self.stub is None and not remote:
            raise ValueError("config sets neither a stub nor a remote endpoint")
        if remote and not self.model:
            raise ValueError("remote provider config requires a model name")
        if self.stub is not None:
            allowed = (_STUB_EMBEDDERS if self.kind == "embedder"
                       else _STUB_GENERATORS)
            if self.stub not in allowed:
                raise ValueError(
                    f"unknown {self.kind} stub {self.stub!r}; "
                    f"expected one of {allowed}"
                )
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @property
    def mode(self) -> str:
        return "stub" if self.stub is not None else "remote"


def _post_json(config: ProviderConfig, route: str, body: dict) -> dict:
    url = config.base_url.rstrip("/") + route
    headers = {}
    if config.token_env:
        token = os.environ.get(config.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
    try:
        response = requests.post(url, json=body, headers=headers,
                                 timeout=config.timeout)
    except requests.RequestException as exc:
        raise ProviderError(f"request to {url} failed: {exc}") from exc
    if response.status_code != 200:
        raise ProviderError(f"{url} returned status {response.status_code}")
    try:
        return response.json()
    except ValueError as exc:
        raise ProviderError(f"{url} returned non-JSON body") from exc


class DetEmbedder:
    mode = "stub"
    name = "det"

    def embed(self, text: str, dimension: int) -> Embedding:
        return det_embed(text, dimension)


class RemoteEmbedder:
    mode = "remote"

    def __init__(self, config: ProviderConfig) -> None:
        self.config = config
        self.name = config.model

    def embed(self, text: str, dimension: int) -> Embedding:
        payload = _post_json(self.config, "/embed",
                             {"model": self.config.model, "input": text})
        values = payload.get("values")
        if not isinstance(values, list) or len(values) != dimension:
            raise ProviderError(
                f"embedder returned {type(values).__name__} instead of "
                f"{dimension} values"
            )
        vec = np.asarray(values, dtype=np.float64)
        return Embedding(vec, degenerate=not vec.any())


class EchoGenerator:
    """Returns its prompt verbatim; the simplest honest generator."""

    mode = "stub"
    name = "echo"

    def generate(self, prompt: str) -> str:
        return prompt


_SENTENCE_RE = re.compile(r"[.!?]")
_WORD_RE = re.compile(r"[^\W_]+")


class QaStubGenerator:
    """Emits two question/answer lines grounded in the prompt's text block.

    Stands in for a generative model during dataset construction: output
    is deterministic and always matches the export line grammar.
    """

    mode = "stub"
    name = "qa"

    _TEXT_MARKER = "Text:\n"

    def generate(self, prompt: str) -> str:
        marker = prompt.find(self._TEXT_MARKER)
        content = prompt[marker + len(self._TEXT_MARKER):] if marker >= 0 else prompt
        content = " ".join(content.split())
        if not content:
            return ""
        sentence = _SENTENCE_RE.split(content)[0].strip()
        if not sentence:
            sentence = " ".join(content.split()[:12])
        words = []
        for word in _WORD_RE.findall(content.lower()):
            if word not in words:
                words.append(word)
            if len(words) == 5:
                break
        lines = [
            f"### Human: What is this passage about? "
            f"### Assistant: {sentence}.",
            f"### Human: Which key terms appear in this passage? "
            f"### Assistant: {', '.join(words)}.",
        ]
        return "\n".join(lines)


class ScriptedGenerator:
    """Replays canned outputs in order; repeats the last one when exhausted."""

    mode = "stub"
    name = "scripted"

    def __init__(self, outputs: list[str]) -> None:
        if not outputs:
            raise ValueError("scripted generator needs at least one output")
        self._outputs = list(outputs)
        self._calls = 0
        self.prompts: list[str] = []

    def generate(self, prompt: str) -> str:
        self.prompts.append(prompt)
        index = min(self._calls, len(self._outputs) - 1)
        self._calls += 1
        return self._outputs[index]


class FailingGenerator:
    """Raises on every call; models a provider outage."""

    mode = "stub"
    name = "failing"

    def generate(self, prompt: str) -> str:
        raise ProviderError("generator unavailable")


class RemoteGenerator:
    mode = "remote"

    def __init__(self, config: ProviderConfig) -> None:
        self.config = config
        self.name = config.model

    def generate(self, prompt: str) -> str:
        payload = _post_json(self.config, "/generate",
                             {"model": self.config.model, "input": prompt})
        text = payload.get("text")
        if not isinstance(text, str):
            raise ProviderError("generator response missing text field")
        return text


def build_embedder(config: ProviderConfig):
    if config.kind != "embedder":
        raise ValueError("embedder role configured with a generator")
    if config.stub == "det":
        return DetEmbedder()
    return RemoteEmbedder(config)


def build_generator(config: ProviderConfig):
    if config.kind != "generator":
        raise ValueError("generator role configured with an embedder")
    if config.stub == "echo":
        return EchoGenerator()
    if config.stub == "qa":
        return QaStubGenerator()
    return RemoteGenerator(config)


@dataclass(frozen=True)
class ProviderSet:
    embedder: object
    finetuned: object
    foundational: object
    qa: object

    def describe(self) -> dict[str, dict[str, str]]:
        return {
            role: {"mode": provider.mode, "name": provider.name}
            for role, provider in (
                ("embedder", self.embedder),
                ("finetuned", self.finetuned),
                ("foundational", self.foundational),
                ("qa", self.qa),
            )
        }


def default_provider_set() -> ProviderSet:
    return ProviderSet(
        embedder=DetEmbedder(),
        finetuned=EchoGenerator(),
        foundational=EchoGenerator(),
        qa=QaStubGenerator(),
    )


_ENV_FIELDS = {
    "STUB": "stub",
    "BASE_URL": "base_url",
    "MODEL": "model",
    "TOKEN_ENV": "token_env",
    "TIMEOUT": "timeout",
}


def load_provider_set(path: Path | str | None = None,
                      env: dict[str, str] | None = None) -> ProviderSet:
    """Build providers from an optional JSON config plus env overrides.

    File shape: {"embedder": {"stub": "det"}, "finetuned": {...}, ...}.
    Environment variables QIMRAG_<ROLE>_<FIELD> (e.g.
    QIMRAG_FOUNDATIONAL_BASE_URL) override file values; roles left
    unconfigured fall back to the offline stubs.
    """
    env = os.environ if env is None else env
    raw: dict[str, dict] = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        unknown = set(raw) - set(ROLES)
        if unknown:
            raise ValueError(f"unknown provider roles in config: {unknown}")
    defaults = {"embedder": "det", "finetuned": "echo",
                "foundational": "echo", "qa": "qa"}
    built = {}
    for role in ROLES:
        fields = dict(raw.get(role, {}))
        for env_suffix, field_name in _ENV_FIELDS.items():
            value = env.get(f"QIMRAG_{role.upper()}_{env_suffix}")
            if value is not None:
                fields[field_name] = value
        if "timeout" in fields:
            fields["timeout"] = float(fields["timeout"])
        kind = "embedder" if role == "embedder" else "generator"
        if not fields:
            fields = {"stub": defaults[role]}
        if "base_url" in fields:
            fields.pop("stub", None)
        config = ProviderConfig(kind=kind, **fields)
        builder = build_embedder if kind == "embedder" else build_generator
        built[role] = builder(config)
    return ProviderSet(**built)
