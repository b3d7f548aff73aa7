"""Page-wise transition sequences and frequent contiguous pattern mining.

Each labeled page contributes an ordered sequence of transition labels.
Counting is contiguous-window (n-gram) with overlaps; windows never span
page or run boundaries. A gapped subsequence mode is available for
experimentation.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

from panelscope.corpus import (
    AnnotationRecord,
    Corpus,
    GenreGroup,
    PanelPair,
    TransitionLabel,
    extract_pairs,
)
from panelscope.errors import ValidationError


@dataclass(frozen=True)
class PageSequence:
    book_id: str
    page_index: int
    labels: tuple[TransitionLabel, ...]


@dataclass(frozen=True)
class Pattern:
    labels: tuple[TransitionLabel, ...]
    count: int
    rank: int

    def code(self) -> str:
        return "[" + ",".join(l.name for l in self.labels) + "]"


def page_sequences(
    corpus: Corpus, labels: dict[PanelPair, TransitionLabel]
) -> list[PageSequence]:
    """Maximal labeled runs of within-page pairs, in reading order.

    A page whose pairs are only partially labeled splits into one sequence per
    maximal contiguous labeled run; empty runs are omitted.
    """
    sequences: list[PageSequence] = []
    pairs = extract_pairs(corpus)
    by_page: dict[tuple[str, int], list[PanelPair]] = {}
    for p in pairs:
        by_page.setdefault((p.book_id, p.page_index), []).append(p)
    for (book_id, page_index), page_pairs in by_page.items():
        run: list[TransitionLabel] = []
        for pair in page_pairs:
            label = labels.get(pair)
            if label is None:
                if run:
                    sequences.append(PageSequence(book_id, page_index, tuple(run)))
                    run = []
            else:
                run.append(label)
        if run:
            sequences.append(PageSequence(book_id, page_index, tuple(run)))
    return sequences


def ngram_counts(
    sequences: list[PageSequence] | list[tuple[TransitionLabel, ...]], n: int
) -> Counter:
    """Count every contiguous length-n window across all sequences (overlaps count)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    counts: Counter = Counter()
    for seq in sequences:
        labels = seq.labels if isinstance(seq, PageSequence) else tuple(seq)
        for i in range(len(labels) - n + 1):
            counts[labels[i : i + n]] += 1
    return counts


def gapped_counts(
    sequences: list[PageSequence] | list[tuple[TransitionLabel, ...]],
    n: int,
    max_gap: int = 1,
) -> Counter:
    """Count length-n subsequences allowing up to max_gap skipped positions
    between consecutive elements (GSP-style); max_gap=0 equals ngram_counts."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if max_gap < 0:
        raise ValidationError("max_gap must be >= 0")
    counts: Counter = Counter()

    def extend(labels, start, prefix):
        if len(prefix) == n:
            counts[tuple(prefix)] += 1
            return
        for j in range(start, min(start + max_gap + 1, len(labels))):
            extend(labels, j + 1, prefix + [labels[j]])

    for seq in sequences:
        labels = seq.labels if isinstance(seq, PageSequence) else tuple(seq)
        for i in range(len(labels)):
            extend(labels, i + 1, [labels[i]])
    return counts


def top_k(counts: Counter, k: int = 4) -> list[Pattern]:
    """Rank patterns by count; equal counts share a rank (ties ordered by label).

    Rank groups beyond the one containing rank k are truncated.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not counts:
        return []
    by_count: dict[int, list[tuple[TransitionLabel, ...]]] = {}
    for pattern, count in counts.items():
        by_count.setdefault(count, []).append(pattern)
    out: list[Pattern] = []
    rank = 1
    for count in sorted(by_count, reverse=True):
        if rank > k:
            break
        group = sorted(by_count[count], key=lambda p: tuple(l.index for l in p))
        out.extend(Pattern(p, count, rank) for p in group)
        rank += len(group)
    return out


def mine(
    corpus: Corpus,
    labels: dict[PanelPair, TransitionLabel],
    groups: dict[str, GenreGroup | str],
    lengths: tuple[int, ...] = (1, 2, 3, 4),
    k: int = 4,
    max_gap: int | None = None,
) -> dict[str, dict[int, list[Pattern]]]:
    """Per-group, per-length top-k pattern report over page-wise sequences."""
    sequences = page_sequences(corpus, labels)
    by_group: dict[str, list[PageSequence]] = {}
    for seq in sequences:
        group = groups.get(seq.book_id)
        if group is None:
            continue
        name = group.name if isinstance(group, GenreGroup) else str(group)
        by_group.setdefault(name, []).append(seq)

    report: dict[str, dict[int, list[Pattern]]] = {}
    for name in sorted(by_group):
        seqs = by_group[name]
        if not seqs:
            warnings.warn(f"group {name} has no labeled sequences; omitted")
            continue
        per_length = {}
        for n in lengths:
            counts = (
                ngram_counts(seqs, n)
                if max_gap is None
                else gapped_counts(seqs, n, max_gap)
            )
            per_length[n] = top_k(counts, k)
        report[name] = per_length
    return report


def labels_from_records(
    records: list[AnnotationRecord], annotator_id: str | None = None
) -> dict[PanelPair, TransitionLabel]:
    """Collapse annotation records into a pair->label map, optionally filtered
    to one annotator (e.g. 'oracle' or 'model')."""
    out: dict[PanelPair, TransitionLabel] = {}
    for r in records:
        if annotator_id is None or r.annotator_id == annotator_id:
            out[r.pair] = r.label
    return out
