"""Corpus data model: books, pages, panels, transition annotations, genre groups.

A corpus lives on disk as a directory of line-delimited JSON files
(``books.jsonl``, ``panels.jsonl``, ``annotations.jsonl``). Reading order is
taken exactly as listed in the manifest; right-to-left layout resolution is
the corpus producer's job.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from panelscope.errors import (
    EmptyInputError,
    NotFoundError,
    ParseError,
    ValidationError,
)


class TransitionLabel(Enum):
    """The six-way categorical label for the gutter between consecutive panels."""

    ACT = ("AC", "Action-to-action")
    ASP = ("AS", "Aspect-to-aspect")
    SUB = ("SU", "Subject-to-subject")
    SCE = ("SC", "Scene-to-scene")
    MOM = ("MO", "Moment-to-moment")
    NON = ("NO", "Non-sequitur")

    def __init__(self, short_code: str, full_name: str):
        self.short_code = short_code
        self.full_name = full_name

    @property
    def index(self) -> int:
        return _LABEL_INDEX[self]

    @classmethod
    def from_code(cls, code: str) -> "TransitionLabel":
        """Parse a two- or three-letter code, case-insensitively."""
        c = code.strip().upper()
        for label in cls:
            if c in (label.name, label.short_code):
                return label
        raise ValidationError(
            f"unknown transition code {code!r}; expected one of "
            + ", ".join(f"{l.name}/{l.short_code}" for l in cls)
        )


LABELS: tuple[TransitionLabel, ...] = tuple(TransitionLabel)
_LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}
N_LABELS = len(LABELS)


MANGA109_GENRES = frozenset(
    {
        "humor",
        "battle",
        "romantic comedy",
        "animal",
        "science fiction",
        "sports",
        "historical drama",
        "fantasy",
        "love romance",
        "suspense",
        "horror",
        "four frame cartoons",
    }
)


class GenreGroup(Enum):
    """Coarse merging of the twelve genres into five groups."""

    ROMANCE = frozenset({"love romance", "romantic comedy"})
    FICTION = frozenset({"science fiction", "fantasy"})
    ACTION = frozenset({"battle", "sports"})
    PLOT = frozenset({"historical drama", "suspense", "animal"})
    FOUR_PANEL = frozenset({"four frame cartoons"})

    @property
    def members(self) -> frozenset[str]:
        return self.value


def normalize_genre(genre: str) -> str:
    g = genre.strip().lower()
    if g not in MANGA109_GENRES:
        raise ValidationError(
            f"unknown genre {genre!r}; allowed: {sorted(MANGA109_GENRES)}"
        )
    return g


def genre_group_of(genre: str) -> GenreGroup | None:
    """Map a genre to its group, or None for ungrouped genres (humor, horror)."""
    g = normalize_genre(genre)
    for group in GenreGroup:
        if g in group.members:
            return group
    return None


@dataclass(frozen=True)
class Panel:
    book_id: str
    page_index: int
    panel_index: int
    image_ref: str | None = None

    def __post_init__(self):
        if self.page_index < 0 or self.panel_index < 0:
            raise ValidationError(f"negative index in panel {self.key}")

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.book_id, self.page_index, self.panel_index)


@dataclass(frozen=True, order=True)
class PanelPair:
    """Two consecutive panels on the same page, in reading order."""

    book_id: str
    page_index: int
    first_panel_index: int
    second_panel_index: int

    def __post_init__(self):
        if self.second_panel_index != self.first_panel_index + 1:
            raise ValidationError(
                f"pair panels must be consecutive, got "
                f"({self.first_panel_index}, {self.second_panel_index})"
            )

    @classmethod
    def at(cls, book_id: str, page_index: int, first: int) -> "PanelPair":
        return cls(book_id, page_index, first, first + 1)

    @property
    def first_key(self) -> tuple[str, int, int]:
        return (self.book_id, self.page_index, self.first_panel_index)

    @property
    def second_key(self) -> tuple[str, int, int]:
        return (self.book_id, self.page_index, self.second_panel_index)

    def to_dict(self) -> dict:
        return {
            "book_id": self.book_id,
            "page_index": self.page_index,
            "first_panel_index": self.first_panel_index,
            "second_panel_index": self.second_panel_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PanelPair":
        return cls(
            d["book_id"],
            int(d["page_index"]),
            int(d["first_panel_index"]),
            int(d["second_panel_index"]),
        )

    @property
    def key_str(self) -> str:
        return f"{self.book_id}:{self.page_index}:{self.first_panel_index}"

    @classmethod
    def from_key_str(cls, key: str) -> "PanelPair":
        parts = key.rsplit(":", 2)
        if len(parts) != 3:
            raise ValidationError(f"malformed pair key {key!r}")
        try:
            return cls.at(parts[0], int(parts[1]), int(parts[2]))
        except ValueError as e:
            raise ValidationError(f"malformed pair key {key!r}") from e


@dataclass(frozen=True)
class AnnotationRecord:
    pair: PanelPair
    annotator_id: str
    label: TransitionLabel

    def to_dict(self) -> dict:
        return {
            "pair": self.pair.to_dict(),
            "annotator_id": self.annotator_id,
            "label": self.label.name,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            PanelPair.from_dict(d["pair"]),
            str(d["annotator_id"]),
            TransitionLabel.from_code(d["label"]),
        )


@dataclass(frozen=True)
class BookMeta:
    book_id: str
    title: str
    genre: str
    page_count: int

    def __post_init__(self):
        object.__setattr__(self, "genre", normalize_genre(self.genre))
        if self.page_count <= 0:
            raise ValidationError(f"book {self.book_id}: page_count must be positive")


@dataclass
class Corpus:
    """Immutable-after-load container for books, panels, and annotations."""

    books: dict[str, BookMeta] = field(default_factory=dict)
    panels: dict[tuple[str, int, int], Panel] = field(default_factory=dict)
    annotations: list[AnnotationRecord] = field(default_factory=list)

    def pages_of(self, book_id: str) -> dict[int, list[Panel]]:
        """Panels of a book grouped by page, in reading order."""
        pages: dict[int, list[Panel]] = {}
        for panel in self.panels.values():
            if panel.book_id == book_id:
                pages.setdefault(panel.page_index, []).append(panel)
        for page in pages.values():
            page.sort(key=lambda p: p.panel_index)
        return dict(sorted(pages.items()))

    def annotations_by(self, annotator_id: str) -> list[AnnotationRecord]:
        return [r for r in self.annotations if r.annotator_id == annotator_id]

    def annotator_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.annotations:
            seen.setdefault(r.annotator_id)
        return list(seen)


def _validate_pages(corpus: Corpus) -> None:
    for book_id in {p.book_id for p in corpus.panels.values()}:
        for page_index, panels in corpus.pages_of(book_id).items():
            indices = [p.panel_index for p in panels]
            if indices != list(range(len(indices))):
                raise ValidationError(
                    f"book {book_id} page {page_index}: panel_index sequence "
                    f"{indices} is not contiguous from 0"
                )


def _read_jsonl(path: Path) -> list[tuple[int, dict]]:
    records = []
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path.name}:{lineno}: malformed JSON: {e}") from e
            if not isinstance(obj, dict):
                raise ParseError(f"{path.name}:{lineno}: record must be an object")
            records.append((lineno, obj))
    return records


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus manifest directory.

    Raises ParseError for malformed records (naming the line), ValidationError
    for duplicate panel keys, non-contiguous panel indices, or unknown genres.
    """
    root = Path(path)
    if not root.is_dir():
        raise NotFoundError(f"corpus directory not found: {root}")

    corpus = Corpus()

    books_path = root / "books.jsonl"
    if books_path.exists():
        for lineno, obj in _read_jsonl(books_path):
            try:
                book = BookMeta(
                    str(obj["book_id"]),
                    str(obj.get("title", obj["book_id"])),
                    str(obj["genre"]),
                    int(obj["page_count"]),
                )
            except KeyError as e:
                raise ParseError(f"books.jsonl:{lineno}: missing field {e}") from e
            if book.book_id in corpus.books:
                raise ValidationError(f"books.jsonl:{lineno}: duplicate book {book.book_id}")
            corpus.books[book.book_id] = book

    panels_path = root / "panels.jsonl"
    if panels_path.exists():
        for lineno, obj in _read_jsonl(panels_path):
            try:
                panel = Panel(
                    str(obj["book_id"]),
                    int(obj["page_index"]),
                    int(obj["panel_index"]),
                    obj.get("image_ref"),
                )
            except KeyError as e:
                raise ParseError(f"panels.jsonl:{lineno}: missing field {e}") from e
            if panel.key in corpus.panels:
                raise ValidationError(
                    f"panels.jsonl:{lineno}: duplicate panel key {panel.key}"
                )
            corpus.panels[panel.key] = panel

    annotations_path = root / "annotations.jsonl"
    if annotations_path.exists():
        # later records for the same (annotator, pair) replace earlier ones
        latest: dict[tuple[str, PanelPair], AnnotationRecord] = {}
        for lineno, obj in _read_jsonl(annotations_path):
            try:
                record = AnnotationRecord.from_dict(obj)
            except (KeyError, TypeError) as e:
                raise ParseError(f"annotations.jsonl:{lineno}: bad record: {e}") from e
            latest[(record.annotator_id, record.pair)] = record
        corpus.annotations = list(latest.values())

    _validate_pages(corpus)
    return corpus


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out in manifest form (inverse of load_corpus)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "books.jsonl").open("w", encoding="utf-8") as f:
        for book in corpus.books.values():
            f.write(
                json.dumps(
                    {
                        "book_id": book.book_id,
                        "title": book.title,
                        "genre": book.genre,
                        "page_count": book.page_count,
                    }
                )
                + "\n"
            )
    with (root / "panels.jsonl").open("w", encoding="utf-8") as f:
        for panel in corpus.panels.values():
            obj = {
                "book_id": panel.book_id,
                "page_index": panel.page_index,
                "panel_index": panel.panel_index,
            }
            if panel.image_ref is not None:
                obj["image_ref"] = panel.image_ref
            f.write(json.dumps(obj) + "\n")
    with (root / "annotations.jsonl").open("w", encoding="utf-8") as f:
        for record in corpus.annotations:
            f.write(json.dumps(record.to_dict()) + "\n")


def extract_pairs(corpus: Corpus, book_id: str | None = None) -> list[PanelPair]:
    """All within-page consecutive panel pairs, in reading order.

    A page with n panels yields n-1 pairs; pages with 0 or 1 panel yield none.
    """
    if book_id is not None:
        if book_id not in corpus.books and not any(
            p.book_id == book_id for p in corpus.panels.values()
        ):
            raise NotFoundError(f"unknown book_id {book_id!r}")
        book_ids = [book_id]
    else:
        book_ids = list(corpus.books)
        for p in corpus.panels.values():
            if p.book_id not in corpus.books and p.book_id not in book_ids:
                book_ids.append(p.book_id)

    pairs: list[PanelPair] = []
    for bid in book_ids:
        for page_index, panels in corpus.pages_of(bid).items():
            for i in range(len(panels) - 1):
                pairs.append(PanelPair.at(bid, page_index, i))
    return pairs


def label_distribution(records: list[AnnotationRecord] | list[TransitionLabel]) -> np.ndarray:
    """Fraction of records per transition label, as a 6-vector summing to 1."""
    if not records:
        raise EmptyInputError("label_distribution requires at least one record")
    counts = np.zeros(N_LABELS)
    for r in records:
        label = r.label if isinstance(r, AnnotationRecord) else r
        counts[label.index] += 1
    return counts / counts.sum()


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Read a standalone annotations.jsonl file (e.g. an oracle label file)."""
    p = Path(path)
    if not p.exists():
        raise NotFoundError(f"annotation file not found: {p}")
    latest: dict[tuple[str, PanelPair], AnnotationRecord] = {}
    for lineno, obj in _read_jsonl(p):
        try:
            record = AnnotationRecord.from_dict(obj)
        except (KeyError, TypeError) as e:
            raise ParseError(f"{p.name}:{lineno}: bad record: {e}") from e
        latest[(record.annotator_id, record.pair)] = record
    return list(latest.values())


def save_annotations(records: list[AnnotationRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record.to_dict()) + "\n")


def group_assignment(corpus: Corpus, warn_ungrouped: bool = True) -> dict[str, GenreGroup]:
    """book_id -> genre group, excluding books whose genre has no group."""
    assignment: dict[str, GenreGroup] = {}
    for book in corpus.books.values():
        group = genre_group_of(book.genre)
        if group is None:
            if warn_ungrouped:
                warnings.warn(
                    f"book {book.book_id}: genre {book.genre!r} belongs to no "
                    "group and is excluded from group-level reports"
                )
            continue
        assignment[book.book_id] = group
    return assignment
