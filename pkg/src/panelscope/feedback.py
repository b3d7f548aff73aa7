"""Iterative feedback-training loop: train, predict a batch, verify, grow the pool.

Each round re-splits the labeled pool 90/10, continues training on the train
part, predicts a sample of unlabeled pairs, and asks a feedback source (an
oracle label file or a live annotation session) to label them. Pairs whose
prediction matches the feedback enter the labeled pool; the rest return to
the unlabeled pool and may be re-queried in later rounds.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from panelscope.classifier import TransitionClassifier, evaluate, safe_kappa
from panelscope.agreement import ConfusionMatrix
from panelscope.corpus import (
    LABELS,
    N_LABELS,
    AnnotationRecord,
    PanelPair,
    TransitionLabel,
    load_annotations,
)
from panelscope.errors import EmptyInputError, NotFoundError, ValidationError
from panelscope.features import FeatureStore, pair_matrix

MIN_POOL_SIZE = 10


@dataclass
class LabelPool:
    labeled: dict[PanelPair, TransitionLabel]
    unlabeled: set[PanelPair]
    holdout_fraction: float = 0.1
    round_index: int = 0

    def __post_init__(self):
        if not 0 < self.holdout_fraction < 1:
            raise ValidationError("holdout_fraction must be in (0, 1)")
        overlap = set(self.labeled) & self.unlabeled
        if overlap:
            raise ValidationError(f"labeled and unlabeled overlap on {len(overlap)} pairs")

    @property
    def size(self) -> int:
        return len(self.labeled) + len(self.unlabeled)


@dataclass
class RoundReport:
    round_index: int
    train_size: int
    holdout_size: int
    holdout_accuracy: float
    feedback_batch_size: int
    feedback_correct_count: int
    kappa_vs_feedback: float
    pool_size_after: int

    def to_dict(self) -> dict:
        return asdict(self)


class OracleFeedback:
    """Feedback source backed by a fixed pair->label mapping (annotator 'oracle')."""

    kind = "oracle_file"

    def __init__(self, labels: dict[PanelPair, TransitionLabel]):
        self.labels = labels

    @classmethod
    def from_file(cls, path: str | Path) -> "OracleFeedback":
        records = load_annotations(path)
        return cls({r.pair: r.label for r in records})

    def labels_for(self, pairs: list[PanelPair]) -> dict[PanelPair, TransitionLabel]:
        out = {}
        for pair in pairs:
            if pair not in self.labels:
                raise NotFoundError(f"oracle has no label for pair {pair.key_str}")
            out[pair] = self.labels[pair]
        return out


class SessionFeedback:
    """Feedback source that opens an annotation session on a running service
    and blocks until the annotator completes it."""

    kind = "interactive_session"

    def __init__(
        self,
        base_url: str,
        annotator_id: str,
        poll_interval: float = 0.5,
        timeout: float = 3600.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.annotator_id = annotator_id
        self.poll_interval = poll_interval
        self.timeout = timeout

    def labels_for(self, pairs: list[PanelPair]) -> dict[PanelPair, TransitionLabel]:
        import httpx

        with httpx.Client(base_url=self.base_url, timeout=30.0) as client:
            resp = client.post(
                "/sessions",
                json={
                    "annotator_id": self.annotator_id,
                    "mode": "round_feedback",
                    "pairs": [p.to_dict() for p in pairs],
                },
            )
            resp.raise_for_status()
            session_id = resp.json()["session_id"]
            deadline = time.monotonic() + self.timeout
            while True:
                progress = client.get(f"/sessions/{session_id}/progress")
                progress.raise_for_status()
                body = progress.json()
                if body.get("done"):
                    return {
                        PanelPair.from_dict(r["pair"]): TransitionLabel.from_code(r["label"])
                        for r in body["labels"]
                    }
                if time.monotonic() > deadline:
                    raise TimeoutError(
                        f"session {session_id} not completed within {self.timeout}s"
                    )
                time.sleep(self.poll_interval)


def split_pool(
    pool: LabelPool, seed: int
) -> tuple[list[PanelPair], list[PanelPair]]:
    """Fresh 90/10 train/holdout split, deterministic in (seed, round_index)."""
    n = len(pool.labeled)
    if n < MIN_POOL_SIZE:
        raise ValidationError(
            f"labeled pool has {n} pairs; at least {MIN_POOL_SIZE} required to split"
        )
    pairs = sorted(pool.labeled)
    rng = np.random.default_rng([seed, pool.round_index])
    order = rng.permutation(n)
    holdout_size = max(1, int(n * pool.holdout_fraction))
    holdout = [pairs[i] for i in order[:holdout_size]]
    train = [pairs[i] for i in order[holdout_size:]]
    return train, holdout


def _xy(pool_labels: dict[PanelPair, TransitionLabel], pairs: list[PanelPair], store: FeatureStore):
    X = pair_matrix(store, pairs)
    y = np.array([pool_labels[p].index for p in pairs], dtype=int)
    return X, y


def run_round(
    pool: LabelPool,
    clf: TransitionClassifier,
    store: FeatureStore,
    feedback,
    seed: int = 0,
    feedback_batch_size: int = 100,
    adopt_corrections: bool = False,
    cold_start: bool = False,
) -> RoundReport:
    """One loop round; mutates the pool and the classifier in place."""
    if not pool.unlabeled:
        raise EmptyInputError("unlabeled pool is empty; nothing to query")

    train_pairs, holdout_pairs = split_pool(pool, seed)
    X_train, y_train = _xy(pool.labeled, train_pairs, store)
    X_hold, y_hold = _xy(pool.labeled, holdout_pairs, store)

    if cold_start or not hasattr(clf, "params_"):
        clf.initialize(X_train.shape[1])
    clf.train_more(X_train, y_train)
    holdout_accuracy, _, _ = evaluate(clf, X_hold, y_hold)

    batch_size = feedback_batch_size
    if len(pool.unlabeled) < batch_size:
        warnings.warn(
            f"only {len(pool.unlabeled)} unlabeled pairs left; "
            f"using a smaller feedback batch"
        )
        batch_size = len(pool.unlabeled)
    candidates = sorted(pool.unlabeled)
    rng = np.random.default_rng([seed, pool.round_index, 1])
    batch = [candidates[i] for i in rng.choice(len(candidates), batch_size, replace=False)]

    predictions = clf.predict(pair_matrix(store, batch))
    feedback_labels = feedback.labels_for(batch)

    counts = np.zeros((N_LABELS, N_LABELS), dtype=np.int64)
    correct = 0
    for pair, pred_idx in zip(batch, predictions):
        pred = LABELS[int(pred_idx)]
        truth = feedback_labels[pair]
        counts[pred.index, truth.index] += 1
        if pred == truth:
            pool.labeled[pair] = truth
            pool.unlabeled.discard(pair)
            correct += 1
        elif adopt_corrections:
            pool.labeled[pair] = truth
            pool.unlabeled.discard(pair)
    kappa = safe_kappa(ConfusionMatrix(counts))

    pool.round_index += 1
    return RoundReport(
        round_index=pool.round_index,
        train_size=len(train_pairs),
        holdout_size=len(holdout_pairs),
        holdout_accuracy=holdout_accuracy,
        feedback_batch_size=batch_size,
        feedback_correct_count=correct,
        kappa_vs_feedback=kappa.kappa,
        pool_size_after=len(pool.labeled),
    )


def run_experiment(
    ground_truth: dict[PanelPair, TransitionLabel],
    unlabeled: set[PanelPair],
    clf: TransitionClassifier,
    store: FeatureStore,
    feedback,
    max_rounds: int,
    seed: int = 0,
    feedback_batch_size: int = 100,
    adopt_corrections: bool = False,
    cold_start: bool = False,
    report_path: str | Path | None = None,
) -> list[RoundReport]:
    """Run rounds until max_rounds or the unlabeled pool is exhausted.

    Reports are appended to report_path as they complete, so an interrupted
    experiment preserves finished rounds.
    """
    if not ground_truth:
        raise EmptyInputError("ground truth must be non-empty")
    pool = LabelPool(dict(ground_truth), set(unlabeled))
    reports: list[RoundReport] = []
    out = Path(report_path).open("a", encoding="utf-8") if report_path else None
    try:
        for _ in range(max_rounds):
            if not pool.unlabeled:
                break
            report = run_round(
                pool,
                clf,
                store,
                feedback,
                seed=seed,
                feedback_batch_size=feedback_batch_size,
                adopt_corrections=adopt_corrections,
                cold_start=cold_start,
            )
            reports.append(report)
            if out:
                out.write(json.dumps(report.to_dict()) + "\n")
                out.flush()
    finally:
        if out:
            out.close()
    return reports


def run_baseline(
    ground_truth: dict[PanelPair, TransitionLabel],
    unlabeled: set[PanelPair],
    clf: TransitionClassifier,
    store: FeatureStore,
    feedback,
    total_epochs: int,
    seed: int = 0,
    feedback_batch_size: int = 100,
) -> RoundReport:
    """No-feedback ablation: train total_epochs on the fixed pool, then predict
    one feedback batch and score kappa against the feedback labels."""
    if not ground_truth:
        raise EmptyInputError("ground truth must be non-empty")
    pool = LabelPool(dict(ground_truth), set(unlabeled))
    train_pairs, holdout_pairs = split_pool(pool, seed)
    X_train, y_train = _xy(pool.labeled, train_pairs, store)
    X_hold, y_hold = _xy(pool.labeled, holdout_pairs, store)
    clf.initialize(X_train.shape[1])
    clf.train_more(X_train, y_train, epochs=total_epochs)
    holdout_accuracy, _, _ = evaluate(clf, X_hold, y_hold)

    candidates = sorted(pool.unlabeled)
    batch_size = min(feedback_batch_size, len(candidates))
    rng = np.random.default_rng([seed, 0, 1])
    batch = [candidates[i] for i in rng.choice(len(candidates), batch_size, replace=False)]
    predictions = clf.predict(pair_matrix(store, batch))
    feedback_labels = feedback.labels_for(batch)
    counts = np.zeros((N_LABELS, N_LABELS), dtype=np.int64)
    correct = 0
    for pair, pred_idx in zip(batch, predictions):
        pred = LABELS[int(pred_idx)]
        counts[pred.index, feedback_labels[pair].index] += 1
        correct += int(pred == feedback_labels[pair])
    kappa = safe_kappa(ConfusionMatrix(counts))
    return RoundReport(
        round_index=0,
        train_size=len(train_pairs),
        holdout_size=len(holdout_pairs),
        holdout_accuracy=holdout_accuracy,
        feedback_batch_size=batch_size,
        feedback_correct_count=correct,
        kappa_vs_feedback=kappa.kappa,
        pool_size_after=len(pool.labeled),
    )


def oracle_from_records(records: list[AnnotationRecord]) -> OracleFeedback:
    return OracleFeedback({r.pair: r.label for r in records})
