"""Access to the packaged seven-document fixture corpus."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_corpus_dir() -> Path:
    """Directory holding the bundled corpus, one `<doc_id>.txt` per doc."""
    return Path(resources.files("qimrag").joinpath("data", "corpus"))


def load_corpus(directory: Path | str | None = None) -> dict[str, str]:
    """Read every `<doc_id>.txt` file; keys sorted numerically when possible."""
    directory = Path(directory) if directory else fixture_corpus_dir()
    docs = {}
    paths = sorted(
        directory.glob("*.txt"),
        key=lambda p: (0, int(p.stem)) if p.stem.isdigit() else (1, p.stem),
    )
    for path in paths:
        docs[path.stem] = path.read_text(encoding="utf-8")
    if not docs:
        raise FileNotFoundError(f"no .txt documents under {directory}")
    return docs
