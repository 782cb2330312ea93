"""
The HTTP service, end to end over real sockets
==============================================

Boots the service on a loopback port with stub providers, ingests the
fixture corpus, asks a question, rates the answer, restarts the app
over the same cache directory, and exports training data containing
the rated pair.
"""

import socket
import tempfile
import threading
import time
from pathlib import Path

import requests
import uvicorn

from qimrag.providers import default_provider_set
from qimrag.service import ServiceConfig, create_app
from qimrag.corpus import load_corpus

cache = Path(tempfile.mkdtemp()) / "cache"

with socket.socket() as probe:
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
base = f"http://127.0.0.1:{port}"


def serve(app):
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port,
                                           log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.02)
    return server


config = ServiceConfig(cache_dir=cache, providers=default_provider_set())
server = serve(create_app(config))
print("health:", requests.get(f"{base}/health").json())

for doc_id, text in load_corpus().items():
    body = requests.post(f"{base}/ingest",
                         json={"doc_id": doc_id, "text": text}).json()
    print(f"  ingested doc {doc_id}: {body['chunks_created']} chunk(s)")

reply = requests.post(f"{base}/query", json={
    "question": "how do I apply",
    "options": {"k": 7, "threshold": 0.8},
}).json()
print("\ntop reference:", reply["references"][0]["chunk_id"],
      "cosine", round(reply["references"][0]["cosine"], 4),
      "influence", round(reply["references"][0]["qim_score"], 4))

feedback = requests.post(f"{base}/feedback", json={
    "question": reply["question"],
    "final_answer": reply["final_answer"],
    "reference_chunk_ids": [r["chunk_id"] for r in reply["references"]],
    "rating": 5,
}).json()
print("feedback stored with id", feedback["id"])

server.should_exit = True
time.sleep(0.2)

# a fresh app over the same cache sees the collection and the feedback
server = serve(create_app(ServiceConfig(cache_dir=cache,
                                        providers=default_provider_set())))
print("\nafter restart, health:",
      requests.get(f"{base}/health").json()["collection_size"], "chunks")
lines = requests.get(f"{base}/export/training").text.splitlines()
print(f"training export: {len(lines)} lines, rated pair present:",
      any(line.startswith("### Human: how do I apply") for line in lines))
server.should_exit = True
