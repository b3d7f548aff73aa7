"""Test harness for the UI end-to-end check.

Starts the annotation service on a free port, launches one feedback-training
round in a background thread (which opens a session and waits for an
annotator), and prints two JSON lines on stdout:

  1. {"url": ..., "session_id": ...}   once the round's session exists
  2. {"report": ..., "submitted": ..., "expected_correct": ...}  when done

The UI under test plays the annotator between the two lines.
"""

import json
import socket
import sys
import tempfile
import threading
import time
from pathlib import Path

import numpy as np
import uvicorn

from panelscope.classifier import TransitionClassifier
from panelscope.corpus import LABELS, PanelPair
from panelscope.features import FeatureStore, pair_matrix
from panelscope.feedback import LabelPool, SessionFeedback, run_round
from panelscope.service import build_app


def make_dataset(seed=0, panel_dim=4):
    rng = np.random.default_rng(seed)
    centers = 4.0 * rng.normal(size=(6, 2 * panel_dim))
    pairs, labels, vectors = [], [], {}
    page = 0
    for cls, label in enumerate(LABELS):
        for _ in range(6):
            x = centers[cls] + 0.5 * rng.normal(size=2 * panel_dim)
            pair = PanelPair.at("e2e", page, 0)
            vectors[pair.first_key] = x[:panel_dim]
            vectors[pair.second_key] = x[panel_dim:]
            pairs.append(pair)
            labels.append(label)
            page += 1
    return pairs, labels, FeatureStore(panel_dim, vectors)


def main():
    pairs, labels, store = make_dataset()
    truth = dict(zip(pairs, labels))
    pool = LabelPool({p: truth[p] for p in pairs[:20]}, set(pairs[20:30]))
    clf = TransitionClassifier(hidden_units=16, epochs_per_round=5, seed=0)

    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    url = f"http://127.0.0.1:{port}"

    log_path = Path(tempfile.mkdtemp()) / "labels.log"
    app = build_app(log_path)
    service = app.state.service
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    )
    threading.Thread(target=server.run, daemon=True).start()

    feedback = SessionFeedback(url, "ui-annotator", poll_interval=0.1, timeout=60)
    result = {}

    def round_thread():
        result["report"] = run_round(
            pool, clf, store, feedback, seed=0, feedback_batch_size=10
        )

    worker = threading.Thread(target=round_thread, daemon=True)
    worker.start()

    deadline = time.monotonic() + 30
    while not service.sessions:
        if time.monotonic() > deadline:
            print(json.dumps({"error": "session never created"}), flush=True)
            sys.exit(1)
        time.sleep(0.05)
    session_id = next(iter(service.sessions))
    print(json.dumps({"url": url, "session_id": session_id}), flush=True)

    worker.join(timeout=60)
    report = result["report"]
    session = service.sessions[session_id]
    submitted = [
        {"pair_key": pair.key_str, "label": label.name}
        for pair, label in session.completed.items()
    ]
    # run_round leaves the classifier exactly as it was at prediction time,
    # so re-predicting the session queue reproduces the round's predictions
    predictions = clf.predict(pair_matrix(store, session.queue))
    expected_correct = sum(
        int(LABELS[int(i)] == session.completed[p])
        for p, i in zip(session.queue, predictions)
    )
    print(
        json.dumps(
            {
                "report": report.to_dict(),
                "submitted": submitted,
                "expected_correct": expected_correct,
            }
        ),
        flush=True,
    )
    server.should_exit = True


if __name__ == "__main__":
    main()
