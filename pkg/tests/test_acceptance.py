"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line (run with ``pytest -s tests/test_acceptance.py`` to see them inline)."""

import time
from collections import Counter
from itertools import product

import numpy as np

from panelscope.agreement import ConfusionMatrix, cohen_kappa, interpret_kappa
from panelscope.classifier import (
    MlpParams,
    RmsPropState,
    TrainConfig,
    TransitionClassifier,
    gradients,
    init_params,
    one_hot,
    rmsprop_step,
)
from panelscope.clustering import elbow, intersect, kmeans, lloyd, ClusterModel
from panelscope.corpus import (
    LABELS,
    GenreGroup,
    PanelPair,
    TransitionLabel,
    label_distribution,
    load_corpus,
)
from panelscope.features import FeatureStore
from panelscope.feedback import (
    LabelPool,
    OracleFeedback,
    run_baseline,
    run_experiment,
    run_round,
)
from panelscope.seqmine import mine, ngram_counts
from panelscope.service import AnnotationService
from tests.conftest import blob_pair_dataset, make_corpus
from tests.test_classifier import numerical_gradient, rel_error
from tests.test_clustering import exhaustive_min_inertia
from tests.test_seqmine import brute_force_windows

SAMPLE_CORPUS = "data/sample_corpus"


def report(name: str, ok: bool) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    assert ok, name


class TestAcceptance:
    def test_kappa_oracle_equivalence(self):
        start = time.perf_counter()
        rng = np.random.default_rng(0)
        ok = True
        for _ in range(50):
            k = int(rng.integers(2, 7))
            counts = rng.integers(0, 1000 // (k * k) + 1, size=(k, k))
            counts.flat[rng.integers(k * k)] += 1  # never all-zero
            score = cohen_kappa(ConfusionMatrix(counts))
            # independent brute force of the agreement statistic
            total = counts.sum()
            p_o = sum(counts[i, i] for i in range(k)) / total
            p_e = sum(
                counts[i, :].sum() * counts[:, i].sum() for i in range(k)
            ) / (total * total)
            expected = (p_o - p_e) / (1 - p_e)
            ok &= abs(score.kappa - expected) <= 1e-12
        ok &= interpret_kappa(0.774) == "substantial"
        ok &= interpret_kappa(0.5131) == "moderate"
        ok &= time.perf_counter() - start < 1.0
        report("kappa matches brute-force formula to 1e-12; bands as published", ok)

    def test_gradient_correctness(self):
        start = time.perf_counter()
        rng = np.random.default_rng(1)
        ok = True
        for i in range(20):
            dim = int(rng.integers(2, 9))
            n = int(rng.integers(1, 5))
            activation = "softmax" if i % 2 == 0 else "sigmoid"
            params = init_params(i, dim, hidden=int(rng.integers(3, 7)))
            X = rng.normal(size=(n, dim))
            T = one_hot(rng.integers(0, 6, size=n))
            analytic = gradients(params, X, T, activation)
            numeric = numerical_gradient(params, X, T, activation)
            worst = max(
                rel_error(a, b)
                for a, b in zip(analytic.arrays(), numeric.arrays())
            )
            ok &= worst < 1e-4
        ok &= time.perf_counter() - start < 5.0
        report("analytic gradients match central differences (rel err < 1e-4)", ok)

    def test_rmsprop_unit_semantics(self):
        params = MlpParams(
            np.zeros((1, 1)), np.zeros(1), np.zeros((1, 1)), np.zeros(1)
        )
        grads = MlpParams(
            np.ones((1, 1)), np.zeros(1), np.zeros((1, 1)), np.zeros(1)
        )
        state = RmsPropState.zeros_like(params)
        config = TrainConfig(learning_rate=0.1, rmsprop_decay=0.9)
        rmsprop_step(params, grads, state, config)
        hand_theta = -0.1 * 1.0 / (np.sqrt(0.1) + config.rmsprop_epsilon)
        ok = abs(state.accumulators[0][0, 0] - 0.1) <= 1e-6
        ok &= abs(params.W1[0, 0] - hand_theta) <= 1e-6
        ok &= round(float(params.W1[0, 0]), 5) == -0.31623
        report("scalar RMSprop step gives s=0.1, theta=-0.31623 within 1e-6", ok)

    @staticmethod
    def _trend_dataset(seed=0, signal_scale=4.0, nuisance_scale=6.0, n_signal=8):
        """Six Gaussian blobs in 64-d: low-dimensional class signal plus
        high-variance nuisance coordinates, so 300 labeled pairs underfit
        while the grown pool generalizes."""
        rng = np.random.default_rng(seed)
        dim, panel_dim = 64, 32
        centers = np.zeros((6, dim))
        centers[:, :n_signal] = signal_scale * rng.normal(size=(6, n_signal))
        scale = np.ones(dim)
        scale[n_signal:] = nuisance_scale
        pairs, labels, vectors = [], [], {}
        page = 0
        for cls, label in enumerate(LABELS):
            for _ in range(234):
                x = centers[cls] + scale * rng.normal(size=dim)
                pair = PanelPair.at("syn", page, 0)
                vectors[pair.first_key] = x[:panel_dim]
                vectors[pair.second_key] = x[panel_dim:]
                pairs.append(pair)
                labels.append(label)
                page += 1
        order = rng.permutation(len(pairs))
        pairs = [pairs[i] for i in order]
        labels = [labels[i] for i in order]
        return pairs, labels, FeatureStore(panel_dim, vectors)

    def test_feedback_loop_trend(self):
        start = time.perf_counter()
        pairs, labels, store = self._trend_dataset(seed=0)
        truth = dict(zip(pairs, labels))
        labeled = {p: truth[p] for p in pairs[:300]}
        unlabeled = set(pairs[300:1400])
        clf = TransitionClassifier(seed=0)
        reports = run_experiment(
            labeled,
            unlabeled,
            clf,
            store,
            OracleFeedback(truth),
            max_rounds=11,
            seed=0,
            feedback_batch_size=100,
        )
        final = reports[-1]
        baseline = run_baseline(
            labeled,
            unlabeled,
            TransitionClassifier(seed=0),
            store,
            OracleFeedback(truth),
            total_epochs=110,
            seed=0,
            feedback_batch_size=100,
        )
        ok = len(reports) == 11
        ok &= final.holdout_accuracy >= 0.95
        ok &= final.kappa_vs_feedback >= 0.8
        ok &= baseline.kappa_vs_feedback < final.kappa_vs_feedback
        ok &= time.perf_counter() - start < 120.0
        report(
            "feedback loop reaches acc>=0.95, kappa>=0.8; fixed-pool baseline "
            f"strictly lower (loop {final.kappa_vs_feedback:.3f} vs "
            f"baseline {baseline.kappa_vs_feedback:.3f})",
            ok,
        )

    def test_loop_invariants_fuzzed(self):
        rng = np.random.default_rng(2)
        ok = True
        for sim in range(100):
            pairs, labels, store = blob_pair_dataset(
                8, panel_dim=3, noise=float(rng.uniform(0.3, 3.0)), seed=sim
            )
            truth = dict(zip(pairs, labels))
            pool = LabelPool(
                {p: truth[p] for p in pairs[:14]}, set(pairs[14:40])
            )
            clf = TransitionClassifier(
                hidden_units=8, epochs_per_round=2, seed=sim, learning_rate=1e-2
            )
            rate = float(rng.uniform(0, 1))
            sim_rng = rng

            class FuzzedOracle:
                def labels_for(self, batch):
                    X = np.stack(
                        [
                            np.concatenate(
                                [
                                    store.vectors[p.first_key],
                                    store.vectors[p.second_key],
                                ]
                            )
                            for p in batch
                        ]
                    )
                    preds = clf.predict(X)
                    return {
                        p: LABELS[int(i)]
                        if sim_rng.random() < rate
                        else LABELS[int(sim_rng.integers(0, 6))]
                        for p, i in zip(batch, preds)
                    }

            total = pool.size
            prev_labeled = len(pool.labeled)
            for _ in range(2):
                if not pool.unlabeled:
                    break
                r = run_round(
                    pool, clf, store, FuzzedOracle(), seed=sim, feedback_batch_size=8
                )
                ok &= pool.size == total
                ok &= len(pool.labeled) >= prev_labeled
                ok &= 0 <= r.feedback_correct_count <= r.feedback_batch_size
                ok &= r.pool_size_after == len(pool.labeled)
                ok &= not set(pool.labeled) & pool.unlabeled
                prev_labeled = len(pool.labeled)
        report(
            "pool conservation and monotonicity hold on 100 fuzzed loop simulations",
            ok,
        )

    def test_kmeans_oracle_equivalence(self):
        start = time.perf_counter()
        rng = np.random.default_rng(3)
        hits, total = 0, 30
        monotone = True
        for _ in range(total):
            n = int(rng.integers(2, 9))
            k = int(rng.integers(1, min(3, n) + 1))
            X = rng.random((n, 6))
            vectors = {f"b{i}": X[i] for i in range(n)}
            model = kmeans(vectors, k, seed=0, restarts=50)
            if model.inertia <= exhaustive_min_inertia(X, k) + 1e-9:
                hits += 1
            _, _, _, trace = lloyd(X, k, np.random.default_rng(0))
            monotone &= all(
                trace[i + 1] <= trace[i] + 1e-9 for i in range(len(trace) - 1)
            )
        ok = hits / total >= 0.95
        ok &= monotone
        ok &= time.perf_counter() - start < 10.0
        report(
            f"k-means best-of-50 matches exhaustive optimum in {hits}/{total} "
            "instances; inertia non-increasing per iteration",
            ok,
        )

    def test_elbow_four_blobs(self):
        start = time.perf_counter()
        rng = np.random.default_rng(4)
        centers = 10.0 * np.eye(6)[:4]
        vectors = {}
        for c in range(4):
            for i in range(20):
                vectors[f"b{c}_{i}"] = centers[c] + 0.5 * rng.normal(size=6)
        result = elbow(vectors, k_max=8, seed=0)
        ok = result.chosen_k == 4
        ok &= time.perf_counter() - start < 5.0
        report("elbow on 4 well-separated blobs chooses k=4", ok)

    def test_intersection_rows(self):
        rng = np.random.default_rng(5)
        ok = True
        for _ in range(50):
            n_books = int(rng.integers(2, 30))
            k = int(rng.integers(1, 6))
            model = ClusterModel(
                k,
                np.zeros((k, 6)),
                {f"b{i}": int(rng.integers(0, k)) for i in range(n_books)},
                0.0,
            )
            groups = {
                f"b{i}": GenreGroup(
                    list(GenreGroup)[int(rng.integers(0, len(GenreGroup)))]
                )
                for i in range(n_books)
            }
            table = intersect(model, groups)
            ok &= all(abs(row.sum() - 1.0) <= 1e-9 for row in table.rows.values())
        # five books split 2/1/2 over the first three of four clusters
        model = ClusterModel(
            4,
            np.zeros((4, 6)),
            {"b0": 0, "b1": 0, "b2": 1, "b3": 2, "b4": 2},
            0.0,
        )
        table = intersect(model, dict.fromkeys(model.assignments, GenreGroup.ACTION))
        ok &= table.rows["ACTION"].tolist() == [0.4, 0.2, 0.4, 0.0]
        report(
            "intersection rows sum to 1; 2/1/2 split of 5 books gives "
            "(0.4, 0.2, 0.4, 0.0)",
            ok,
        )

    def test_sequence_mining_oracle(self):
        start = time.perf_counter()
        rng = np.random.default_rng(6)
        ok = True
        for _ in range(200):
            sequences = [
                tuple(LABELS[i] for i in rng.integers(0, 6, rng.integers(0, 13)))
                for _ in range(rng.integers(1, 15))
            ]
            for n in range(1, 5):
                counts = ngram_counts(sequences, n)
                ok &= counts == brute_force_windows(sequences, n)
                ok &= sum(counts.values()) == sum(
                    max(0, len(s) - n + 1) for s in sequences
                )
        # a generator emitting runs of length 2 keeps repetitions on top for
        # short windows while mixed patterns appear only from length 3 on
        corpus = make_corpus([7] * 40, genre="battle")
        from panelscope.corpus import extract_pairs

        labels = {}
        by_page: dict[int, list] = {}
        for p in extract_pairs(corpus):
            by_page.setdefault(p.page_index, []).append(p)
        for page_pairs in by_page.values():
            seq: list[TransitionLabel] = []
            while len(seq) < len(page_pairs):
                seq.extend([LABELS[int(rng.integers(0, 3))]] * 2)
            labels.update(zip(page_pairs, seq))
        rep = mine(corpus, labels, {"b1": GenreGroup.ACTION}, lengths=(1, 2, 3))
        for n in (1, 2):
            ok &= len(set(rep["ACTION"][n][0].labels)) == 1
        ok &= any(len(set(p.labels)) > 1 for p in rep["ACTION"][3])
        ok &= time.perf_counter() - start < 10.0
        report(
            "window counts match brute force on 200 corpora; run-length-2 "
            "generator shows repetition-first, mixing at length 3",
            ok,
        )

    def test_bundled_corpus_distribution(self):
        corpus = load_corpus(SAMPLE_CORPUS)
        dist = label_distribution(corpus.annotations)
        target = np.array([0.332, 0.083, 0.204, 0.101, 0.126, 0.151])
        ok = len(corpus.annotations) == 2228
        ok &= bool(np.all(np.abs(dist - target) <= 1e-3))
        report(
            "bundled sample corpus reproduces the published label "
            "distribution within 1e-3",
            ok,
        )

    def test_service_durability(self, tmp_path):
        log = tmp_path / "labels.log"
        service = AnnotationService(log)
        session, _ = service.create_session(
            "ann",
            [PanelPair.at("b", p, 0) for p in range(10)],
            "round_feedback",
            5,
        )
        for p, label in [(0, "ACT"), (1, "NON"), (2, "SUB")]:
            service.submit_label(
                session.session_id,
                PanelPair.at("b", p, 0),
                TransitionLabel.from_code(label),
            )
        service.close()  # crash boundary: only the log survives

        revived = AnnotationService(log)
        restored = revived.sessions[session.session_id]
        ok = restored.annotator_id == session.annotator_id
        ok &= restored.mode == session.mode
        ok &= restored.round_index == session.round_index
        ok &= restored.queue == session.queue
        ok &= restored.completed == session.completed
        ok &= restored.pending == session.pending
        ok &= restored.done == session.done
        report("service restart rebuilds identical session state from the log", ok)
