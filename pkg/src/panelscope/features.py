"""Panel descriptor ingestion and pair-feature construction.

Descriptors come from an external image encoder; the text feature file starts
with a ``dim=<N>`` header followed by one whitespace-separated record per
line: ``book_id page_index panel_index v1 ... vN``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from panelscope.corpus import PanelPair
from panelscope.errors import NotFoundError, ParseError, ValidationError

PanelKey = tuple[str, int, int]


@dataclass
class FeatureStore:
    dim: int
    vectors: dict[PanelKey, np.ndarray]

    def __post_init__(self):
        if self.dim <= 0:
            raise ValidationError("descriptor dim must be positive")
        for key, v in self.vectors.items():
            if v.shape != (self.dim,):
                raise ValidationError(
                    f"panel {key}: descriptor length {v.shape} != dim {self.dim}"
                )
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"panel {key}: non-finite descriptor component")

    def __contains__(self, key: PanelKey) -> bool:
        return key in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class PairFeature:
    pair: PanelPair
    x: np.ndarray


def load_features(path: str | Path) -> FeatureStore:
    """Parse a text feature file into a store with a uniform descriptor length."""
    p = Path(path)
    if not p.exists():
        raise NotFoundError(f"feature file not found: {p}")
    vectors: dict[PanelKey, np.ndarray] = {}
    dim: int | None = None
    with p.open(encoding="utf-8") as f:
        header = f.readline().strip()
        if not header.startswith("dim="):
            raise ParseError(f"{p.name}:1: expected 'dim=<N>' header, got {header!r}")
        try:
            dim = int(header[4:])
        except ValueError as e:
            raise ParseError(f"{p.name}:1: bad dim value {header!r}") from e
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3 + dim:
                raise ValidationError(
                    f"{p.name}:{lineno}: expected {3 + dim} fields, got {len(parts)}"
                )
            try:
                key = (parts[0], int(parts[1]), int(parts[2]))
                v = np.array([float(x) for x in parts[3:]])
            except ValueError as e:
                raise ParseError(f"{p.name}:{lineno}: {e}") from e
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"{p.name}:{lineno}: non-finite value for panel {key}")
            if key in vectors:
                raise ValidationError(f"{p.name}:{lineno}: duplicate panel key {key}")
            vectors[key] = v
    return FeatureStore(dim, vectors)


def save_features(store: FeatureStore, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        f.write(f"dim={store.dim}\n")
        for (book_id, page, panel), v in store.vectors.items():
            vals = " ".join(repr(float(x)) for x in v)
            f.write(f"{book_id} {page} {panel} {vals}\n")


def pair_feature(store: FeatureStore, pair: PanelPair) -> PairFeature:
    """Concatenate the two panel descriptors (first then second) into one vector."""
    for key in (pair.first_key, pair.second_key):
        if key not in store:
            raise NotFoundError(f"no descriptor for panel {key}")
    x = np.concatenate([store.vectors[pair.first_key], store.vectors[pair.second_key]])
    return PairFeature(pair, x)


def pair_matrix(store: FeatureStore, pairs: list[PanelPair]) -> np.ndarray:
    """Stack pair features into an (n, 2*dim) design matrix."""
    return np.stack([pair_feature(store, p).x for p in pairs])


def standardize(store: FeatureStore, keys: list[PanelKey] | None = None) -> FeatureStore:
    """Per-component zero-mean unit-variance rescaling fit on the given keys.

    Off by default in every pipeline; opt-in via config.
    """
    fit_keys = keys if keys is not None else list(store.vectors)
    if not fit_keys:
        raise ValidationError("standardize requires at least one key")
    data = np.stack([store.vectors[k] for k in fit_keys])
    mean = data.mean(axis=0)
    std = data.std(axis=0)
    std[std == 0] = 1.0
    return FeatureStore(
        store.dim, {k: (v - mean) / std for k, v in store.vectors.items()}
    )
