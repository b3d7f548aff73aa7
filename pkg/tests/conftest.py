import numpy as np
import pytest

from panelscope.corpus import (
    LABELS,
    AnnotationRecord,
    BookMeta,
    Corpus,
    Panel,
    PanelPair,
)
from panelscope.features import FeatureStore


def make_corpus(page_layout, genre="battle", book_id="b1"):
    """Corpus with one book whose pages have the given panel counts."""
    corpus = Corpus()
    corpus.books[book_id] = BookMeta(book_id, book_id, genre, max(len(page_layout), 1))
    for page, n_panels in enumerate(page_layout):
        for i in range(n_panels):
            panel = Panel(book_id, page, i)
            corpus.panels[panel.key] = panel
    return corpus


def records_for(pairs, labels, annotator="a1"):
    return [AnnotationRecord(p, annotator, l) for p, l in zip(pairs, labels)]


@pytest.fixture
def small_corpus():
    return make_corpus([4, 3, 1])


def blob_pair_dataset(
    n_per_class, panel_dim=32, noise=0.8, seed=0, book_id="syn", start_page=0
):
    """Synthetic pair dataset: one pair per 2-panel page, pair features drawn
    from one Gaussian blob per transition label."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 1.0, size=(len(LABELS), 2 * panel_dim))
    pairs, labels, vectors = [], [], {}
    page = start_page
    for cls, label in enumerate(LABELS):
        for _ in range(n_per_class):
            x = centers[cls] + noise * rng.normal(size=2 * panel_dim)
            pair = PanelPair.at(book_id, page, 0)
            vectors[pair.first_key] = x[:panel_dim]
            vectors[pair.second_key] = x[panel_dim:]
            pairs.append(pair)
            labels.append(label)
            page += 1
    store = FeatureStore(panel_dim, vectors)
    return pairs, labels, store
