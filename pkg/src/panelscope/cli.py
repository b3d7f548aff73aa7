"""Command-line interface: corpus checks, agreement, training, the feedback
loop, clustering, sequence mining, and the annotation service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from panelscope import agreement, clustering, seqmine
from panelscope.classifier import (
    TrainConfig,
    TransitionClassifier,
    load_checkpoint,
    prediction_records,
    save_checkpoint,
)
from panelscope.corpus import (
    LABELS,
    Corpus,
    PanelPair,
    extract_pairs,
    group_assignment,
    label_distribution,
    load_annotations,
    load_corpus,
)
from panelscope.errors import PanelscopeError
from panelscope.features import load_features, pair_matrix
from panelscope.feedback import (
    OracleFeedback,
    SessionFeedback,
    run_experiment,
)


@click.group()
def main():
    """Panel-transition annotation and narrative analysis toolkit."""


def _fail(e: Exception):
    click.echo(f"error: {e}", err=True)
    sys.exit(1)


def _collapsed_labels(corpus: Corpus, annotator: str | None):
    return seqmine.labels_from_records(corpus.annotations, annotator)


@main.group("corpus")
def corpus_group():
    """Corpus manifest utilities."""


@corpus_group.command("validate")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def corpus_validate(directory):
    """Validate a corpus manifest directory."""
    try:
        corpus = load_corpus(directory)
    except PanelscopeError as e:
        _fail(e)
    pairs = extract_pairs(corpus)
    click.echo(
        f"ok: {len(corpus.books)} books, {len(corpus.panels)} panels, "
        f"{len(pairs)} candidate pairs, {len(corpus.annotations)} annotations"
    )


@corpus_group.command("stats")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def corpus_stats(directory):
    """Print label distribution and pair counts."""
    try:
        corpus = load_corpus(directory)
    except PanelscopeError as e:
        _fail(e)
    pairs = extract_pairs(corpus)
    click.echo(f"{'label':<6} {'fraction':>9}")
    records = {"pairs": len(pairs), "annotations": len(corpus.annotations)}
    if corpus.annotations:
        dist = label_distribution(corpus.annotations)
        for label, frac in zip(LABELS, dist):
            click.echo(f"{label.name:<6} {frac:>9.3f}")
        records["label_distribution"] = {
            l.name: float(f) for l, f in zip(LABELS, dist)
        }
    else:
        click.echo("(no annotations)")
    click.echo(json.dumps(records))


@main.command("agree")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--raters", help="comma-separated pair of annotator ids")
@click.option("--all-pairs", is_flag=True, help="report every annotator pair")
def agree(directory, raters, all_pairs):
    """Inter-annotator agreement on the overlap of two raters."""
    try:
        corpus = load_corpus(directory)
        if all_pairs:
            by_rater = {a: corpus.annotations_by(a) for a in corpus.annotator_ids()}
            for ra, rb, score in agreement.pairwise_report(by_rater):
                click.echo(
                    f"{ra} & {rb}: kappa={score.kappa:.4f} p_o={score.observed_agreement:.4f} "
                    f"p_e={score.expected_agreement:.4f} band={score.band}"
                )
            return
        if not raters or len(raters.split(",")) != 2:
            raise PanelscopeError("pass --raters a,b or --all-pairs")
        ra, rb = (r.strip() for r in raters.split(","))
        m = agreement.build_confusion(
            corpus.annotations_by(ra), corpus.annotations_by(rb)
        )
        score = agreement.cohen_kappa(m)
    except PanelscopeError as e:
        _fail(e)
    header = " ".join(f"{l.name:>5}" for l in LABELS)
    click.echo(f"{'':>5} {header}")
    for label, row in zip(LABELS, m.counts):
        click.echo(f"{label.name:>5} " + " ".join(f"{v:>5}" for v in row))
    click.echo(
        f"kappa={score.kappa:.4f} p_o={score.observed_agreement:.4f} "
        f"p_e={score.expected_agreement:.4f} band={score.band}"
    )


@main.group("features")
def features_group():
    """Panel descriptor files."""


@features_group.command("check")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def features_check(file):
    """Validate a feature file."""
    try:
        store = load_features(file)
    except PanelscopeError as e:
        _fail(e)
    click.echo(f"ok: {len(store)} panels, dim={store.dim}")


@main.command("train")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--features", "features_file", required=True, type=click.Path(exists=True))
@click.option("--config", "config_file", type=click.Path(exists=True))
@click.option("--annotator", help="restrict ground truth to one annotator id")
@click.option("--out", required=True, type=click.Path())
def train_cmd(corpus_dir, features_file, config_file, annotator, out):
    """Train the transition classifier on labeled pairs."""
    try:
        corpus = load_corpus(corpus_dir)
        store = load_features(features_file)
        config = TrainConfig()
        if config_file:
            config = TrainConfig.from_dict(
                json.loads(Path(config_file).read_text(encoding="utf-8"))
            )
        labels = _collapsed_labels(corpus, annotator)
        if not labels:
            raise PanelscopeError("no labeled pairs in corpus")
        pairs = sorted(labels)
        X = pair_matrix(store, pairs)
        y = np.array([labels[p].index for p in pairs], dtype=int)
        clf = TransitionClassifier(**config.to_dict())
        clf.fit(X, y)
        save_checkpoint(clf, out)
    except PanelscopeError as e:
        _fail(e)
    click.echo(json.dumps({"config": config.to_dict(), "history": clf.history_}))
    click.echo(f"saved model to {out}")


@main.command("predict")
@click.option("--model", "model_file", required=True, type=click.Path(exists=True))
@click.option("--features", "features_file", required=True, type=click.Path(exists=True))
@click.option("--pairs", "pairs_file", required=True, type=click.Path(exists=True))
def predict_cmd(model_file, features_file, pairs_file):
    """Emit one prediction record per input pair (JSON lines)."""
    try:
        clf = load_checkpoint(model_file)
        store = load_features(features_file)
        pairs = []
        with open(pairs_file, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    obj = json.loads(line)
                    pairs.append(PanelPair.from_dict(obj.get("pair", obj)))
        scores = clf.predict_proba(pair_matrix(store, pairs))
    except PanelscopeError as e:
        _fail(e)
    for record in prediction_records(pairs, scores):
        click.echo(json.dumps(record))


@main.command("loop")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--features", "features_file", required=True, type=click.Path(exists=True))
@click.option("--oracle", "oracle_file", type=click.Path(exists=True))
@click.option("--interactive", is_flag=True)
@click.option("--service-url", default="http://127.0.0.1:8000")
@click.option("--annotator", default="annotator")
@click.option("--rounds", default=11, type=int)
@click.option("--batch-size", default=100, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--adopt-corrections", is_flag=True)
@click.option("--cold-start", is_flag=True)
@click.option("--config", "config_file", type=click.Path(exists=True))
@click.option("--out", "out_dir", default=".", type=click.Path())
def loop_cmd(
    corpus_dir,
    features_file,
    oracle_file,
    interactive,
    service_url,
    annotator,
    rounds,
    batch_size,
    seed,
    adopt_corrections,
    cold_start,
    config_file,
    out_dir,
):
    """Run the feedback-training loop."""
    try:
        corpus = load_corpus(corpus_dir)
        store = load_features(features_file)
        config = TrainConfig(seed=seed)
        if config_file:
            config = TrainConfig.from_dict(
                json.loads(Path(config_file).read_text(encoding="utf-8"))
            )
        truth = _collapsed_labels(corpus, None)
        if not truth:
            raise PanelscopeError("no labeled ground truth in corpus")
        unlabeled = {p for p in extract_pairs(corpus) if p not in truth}
        if interactive:
            feedback = SessionFeedback(service_url, annotator)
        elif oracle_file:
            feedback = OracleFeedback.from_file(oracle_file)
        else:
            raise PanelscopeError("pass --oracle FILE or --interactive")
        clf = TransitionClassifier(**config.to_dict())
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        reports = run_experiment(
            truth,
            unlabeled,
            clf,
            store,
            feedback,
            max_rounds=rounds,
            seed=seed,
            feedback_batch_size=batch_size,
            adopt_corrections=adopt_corrections,
            cold_start=cold_start,
            report_path=out / "rounds.jsonl",
        )
        save_checkpoint(clf, out / "model.ckpt")
    except PanelscopeError as e:
        _fail(e)
    click.echo(f"{'round':>5} {'acc':>8} {'kappa':>8} {'pool':>6}")
    for r in reports:
        click.echo(
            f"{r.round_index:>5} {r.holdout_accuracy:>8.4f} "
            f"{r.kappa_vs_feedback:>8.4f} {r.pool_size_after:>6}"
        )
    click.echo(f"reports written to {Path(out_dir) / 'rounds.jsonl'}")


def _book_vectors_from_labels(labels_file):
    records = load_annotations(labels_file)
    return clustering.book_vectors(records), records


@main.command("cluster")
@click.option("--labels", "labels_file", required=True, type=click.Path(exists=True))
@click.option("--k", default=4, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_file", type=click.Path())
def cluster_cmd(labels_file, k, seed, out_file):
    """K-means over per-book transition distributions."""
    try:
        vectors, _ = _book_vectors_from_labels(labels_file)
        model = clustering.kmeans(vectors, k, seed=seed)
    except PanelscopeError as e:
        _fail(e)
    click.echo(json.dumps(model.to_json()))
    click.echo(clustering.projection_csv(vectors, model), nl=False)
    if out_file:
        model.save(out_file)
        click.echo(f"model written to {out_file}")


@main.command("elbow")
@click.option("--labels", "labels_file", required=True, type=click.Path(exists=True))
@click.option("--kmax", default=10, type=int)
@click.option("--seed", default=0, type=int)
def elbow_cmd(labels_file, kmax, seed):
    """Distortion/inertia curves and the chosen cluster count."""
    try:
        vectors, _ = _book_vectors_from_labels(labels_file)
        report = clustering.elbow(vectors, k_max=min(kmax, len(vectors)), seed=seed)
    except PanelscopeError as e:
        _fail(e)
    click.echo("k,distortion,inertia")
    for k, d, i in zip(report.ks, report.distortions, report.inertias):
        click.echo(f"{k},{d:.6f},{i:.6f}")
    click.echo(f"chosen_k={report.chosen_k}")


@main.command("intersect")
@click.option("--model", "model_file", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--groups", default="default")
def intersect_cmd(model_file, corpus_dir, groups):
    """Genre-group x cluster intersection table."""
    try:
        model = clustering.ClusterModel.load(model_file)
        corpus = load_corpus(corpus_dir)
        if groups != "default":
            raise PanelscopeError("only the default genre grouping is supported")
        table = clustering.intersect(model, group_assignment(corpus))
    except PanelscopeError as e:
        _fail(e)
    header = " ".join(f"clus{c + 1:>2}" for c in range(table.k))
    click.echo(f"{'group':<12} {header}")
    for name, row in table.rows.items():
        click.echo(f"{name:<12} " + " ".join(f"{v:>6.2f}" for v in row))
    click.echo(json.dumps({name: row.tolist() for name, row in table.rows.items()}))


@main.command("mine")
@click.option("--labels", "labels_file", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--groups", default="default")
@click.option("--lengths", default="1,2,3,4")
@click.option("--topk", default=4, type=int)
@click.option("--max-gap", type=int, help="enable gapped subsequence counting")
def mine_cmd(labels_file, corpus_dir, groups, lengths, topk, max_gap):
    """Most frequent transition sequences per genre group."""
    try:
        corpus = load_corpus(corpus_dir)
        records = load_annotations(labels_file)
        labels = seqmine.labels_from_records(records)
        if groups != "default":
            raise PanelscopeError("only the default genre grouping is supported")
        assignment = group_assignment(corpus)
        length_list = tuple(int(x) for x in lengths.split(","))
        report = seqmine.mine(corpus, labels, assignment, length_list, topk, max_gap)
    except PanelscopeError as e:
        _fail(e)
    for group, per_length in report.items():
        for n, patterns in per_length.items():
            for p in patterns:
                click.echo(f"{group:<12} len={n} rank={p.rank} {p.code()} count={p.count}")
    click.echo(
        json.dumps(
            {
                group: {
                    str(n): [
                        {"labels": [l.name for l in p.labels], "count": p.count, "rank": p.rank}
                        for p in patterns
                    ]
                    for n, patterns in per_length.items()
                }
                for group, per_length in report.items()
            }
        )
    )


@main.command("serve")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True))
@click.option("--port", default=8000, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--log", "log_file", required=True, type=click.Path())
def serve_cmd(corpus_dir, port, host, log_file):
    """Run the annotation session service."""
    import uvicorn

    from panelscope.service import build_app

    app = build_app(log_file, corpus_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
