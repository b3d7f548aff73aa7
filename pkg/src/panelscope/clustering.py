"""Per-book transition vectors, K-means with elbow selection, genre intersections.

Books are embedded as normalized 6-d transition-distribution vectors and
clustered with Lloyd's algorithm (k-means++ seeding, best of several
restarts). Cluster assignments are compared against genre groups.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from panelscope.corpus import (
    LABELS,
    N_LABELS,
    AnnotationRecord,
    GenreGroup,
    label_distribution,
)
from panelscope.errors import ValidationError


@dataclass(frozen=True)
class BookVector:
    book_id: str
    v: np.ndarray


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: dict[str, int]
    inertia: float

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "centroids": self.centroids.tolist(),
            "assignments": self.assignments,
            "inertia": self.inertia,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ClusterModel":
        return cls(
            int(d["k"]),
            np.array(d["centroids"], dtype=float),
            {k: int(v) for k, v in d["assignments"].items()},
            float(d["inertia"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ClusterModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class ElbowReport:
    ks: list[int]
    inertias: list[float]
    distortions: list[float]
    chosen_k: int


@dataclass
class IntersectionTable:
    rows: dict[str, np.ndarray]  # group name -> per-cluster fraction
    k: int


def book_vector(book_id: str, records: list[AnnotationRecord]) -> BookVector:
    """Normalized transition-type counts over a book's labeled pairs."""
    return BookVector(book_id, label_distribution(records))


def book_vectors(records: list[AnnotationRecord]) -> dict[str, np.ndarray]:
    """Per-book normalized transition distributions; unlabeled books are absent."""
    by_book: dict[str, list[AnnotationRecord]] = {}
    for r in records:
        by_book.setdefault(r.pair.book_id, []).append(r)
    return {bid: label_distribution(rs) for bid, rs in sorted(by_book.items())}


def _assign(X: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(X.shape[0]), labels]


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[j] = X[rng.integers(n)]
        else:
            centroids[j] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))
    return centroids


def lloyd(
    X: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """One k-means run; returns centroids, labels, inertia, per-iteration inertia."""
    centroids = _kmeans_pp_init(X, k, rng)
    trace: list[float] = []
    labels = np.zeros(X.shape[0], dtype=int)
    for _ in range(max_iter):
        labels, d2 = _assign(X, centroids)
        trace.append(float(d2.sum()))
        new_centroids = centroids.copy()
        for j in range(k):
            members = X[labels == j]
            if members.shape[0] > 0:
                new_centroids[j] = members.mean(axis=0)
            else:
                # re-seed an empty cluster to the farthest point
                new_centroids[j] = X[d2.argmax()]
        movement = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if movement < tol:
            break
    labels, d2 = _assign(X, centroids)
    inertia = float(d2.sum())
    trace.append(inertia)
    return centroids, labels, inertia, trace


def kmeans(
    vectors: dict[str, np.ndarray],
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    restarts: int = 10,
) -> ClusterModel:
    """Best-of-restarts K-means over named vectors; deterministic given seed.

    Input order is canonicalized by sorting book ids before seeding, so the
    result is invariant to permutation of the input mapping.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > len(vectors):
        raise ValidationError(f"k={k} exceeds number of vectors ({len(vectors)})")
    ids = sorted(vectors)
    X = np.stack([np.asarray(vectors[i], dtype=float) for i in ids])
    best: tuple[float, int, np.ndarray, np.ndarray] | None = None
    rng = np.random.default_rng(seed)
    for r in range(restarts):
        centroids, labels, inertia, _ = lloyd(X, k, rng, max_iter, tol)
        if best is None or inertia < best[0]:
            best = (inertia, r, centroids, labels)
    inertia, _, centroids, labels = best
    return ClusterModel(k, centroids, dict(zip(ids, map(int, labels))), inertia)


def elbow(
    vectors: dict[str, np.ndarray],
    k_min: int = 1,
    k_max: int = 10,
    seed: int = 0,
    restarts: int = 10,
    threshold: float = 0.10,
) -> ElbowReport:
    """Fit each k in range and pick the smallest k where the inertia curve flattens.

    chosen_k is the smallest k whose relative inertia drop to k+1 falls below
    the threshold; if the curve never flattens, k_max is chosen.
    """
    n = len(vectors)
    if k_max > n:
        raise ValidationError(f"k_max={k_max} exceeds number of vectors ({n})")
    ks = list(range(k_min, k_max + 1))
    inertias = [kmeans(vectors, k, seed=seed, restarts=restarts).inertia for k in ks]
    distortions = [i / n for i in inertias]
    chosen_k = ks[-1]
    for i in range(len(ks) - 1):
        # inertia below rounding noise counts as already flat
        drop = (
            (inertias[i] - inertias[i + 1]) / inertias[i]
            if inertias[i] > 1e-12
            else 0.0
        )
        if drop < threshold:
            chosen_k = ks[i]
            break
    return ElbowReport(ks, inertias, distortions, chosen_k)


class TransitionKMeans(BaseEstimator):
    """sklearn-style wrapper over the K-means fit for book transition vectors."""

    def __init__(
        self,
        n_clusters: int = 4,
        seed: int = 0,
        max_iter: int = 300,
        tol: float = 1e-6,
        restarts: int = 10,
    ):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iter = max_iter
        self.tol = tol
        self.restarts = restarts

    def fit(self, vectors: dict[str, np.ndarray]) -> "TransitionKMeans":
        self.model_ = kmeans(
            vectors,
            self.n_clusters,
            seed=self.seed,
            max_iter=self.max_iter,
            tol=self.tol,
            restarts=self.restarts,
        )
        return self

    def predict(self, vectors: dict[str, np.ndarray]) -> dict[str, int]:
        if not hasattr(self, "model_"):
            raise ValidationError("not fitted")
        ids = list(vectors)
        X = np.stack([np.asarray(vectors[i], dtype=float) for i in ids])
        labels, _ = _assign(X, self.model_.centroids)
        return dict(zip(ids, map(int, labels)))


def intersect(
    model: ClusterModel, groups: dict[str, GenreGroup | str]
) -> IntersectionTable:
    """Fraction of each genre group's books landing in each cluster."""
    rows: dict[str, np.ndarray] = {}
    by_group: dict[str, list[str]] = {}
    for book_id, group in groups.items():
        if book_id not in model.assignments:
            continue
        name = group.name if isinstance(group, GenreGroup) else str(group)
        by_group.setdefault(name, []).append(book_id)
    for name in sorted(by_group):
        members = by_group[name]
        if not members:
            warnings.warn(f"group {name} has no clustered books; row omitted")
            continue
        counts = np.zeros(model.k)
        for book_id in members:
            counts[model.assignments[book_id]] += 1
        rows[name] = counts / counts.sum()
    return IntersectionTable(rows, model.k)


def genre_transition_summary(
    records: list[AnnotationRecord], groups: dict[str, GenreGroup | str]
) -> dict[str, np.ndarray]:
    """Unweighted mean of member books' normalized transition vectors, per group."""
    vecs = book_vectors(records)
    by_group: dict[str, list[np.ndarray]] = {}
    for book_id, v in vecs.items():
        group = groups.get(book_id)
        if group is None:
            continue
        name = group.name if isinstance(group, GenreGroup) else str(group)
        by_group.setdefault(name, []).append(v)
    return {name: np.mean(vs, axis=0) for name, vs in sorted(by_group.items())}


def projection_csv(vectors: dict[str, np.ndarray], model: ClusterModel) -> str:
    """Plot-ready CSV of the ACT/ASP/SUB projection with cluster assignments."""
    lines = ["book_id,ACT,ASP,SUB,cluster"]
    for book_id in sorted(vectors):
        v = vectors[book_id]
        c = model.assignments.get(book_id, -1)
        lines.append(f"{book_id},{v[0]:.6f},{v[1]:.6f},{v[2]:.6f},{c}")
    return "\n".join(lines) + "\n"
