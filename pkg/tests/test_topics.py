from __future__ import annotations

import math
from collections import Counter
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discourse_monitor.topics import (
    HashedEmbeddingProvider,
    TopicConfig,
    TopicSnapshot,
    cluster,
    ctfidf,
    daily_snapshots,
    model_window,
    reduce_dimensions,
)

from conftest import make_classified, make_post

# Frozen oracle values, computed once by hand from the weighting rule
# W(t, c) = tf(t, c) * ln(1 + A / f(t)).
THREE_LN_TWO = 2.0794415416798357
TWO_LN_TWO_POINT_FIVE = 1.8325814637483102


class TestCtfidf:
    def test_single_term_classes(self):
        # A: apple x3, B: banana x3 -> A = 3, f = 3, W = 3 ln 2.
        out = ctfidf({"A": ["apple"] * 3, "B": ["banana"] * 3})
        assert out["A"][0][0] == "apple"
        assert out["A"][0][1] == pytest.approx(THREE_LN_TWO, abs=1e-9)

    def test_two_class_example(self):
        # A = (3 + 3) / 2 = 3 tokens per class, f(apple) = 2, tf(apple, A) = 2:
        # W(apple, A) = 2 ln(1 + 3/2) = 2 ln 2.5.
        out = ctfidf({"A": ["apple", "apple", "banana"],
                      "B": ["cherry", "durian", "cherry"]})
        weights = dict(out["A"])
        assert weights["apple"] == pytest.approx(TWO_LN_TWO_POINT_FIVE, abs=1e-9)

    def test_sorted_by_weight_then_term(self):
        out = ctfidf({"A": ["b", "a", "a", "b", "c"]})
        terms = [t for t, _ in out["A"]]
        weights = [w for _, w in out["A"]]
        assert weights == sorted(weights, reverse=True)
        # a and b have equal weight; ties break alphabetically
        assert terms.index("a") < terms.index("b")

    def test_counter_input(self):
        out = ctfidf({"A": Counter({"apple": 2, "banana": 1}),
                      "B": Counter({"cherry": 3})})
        assert dict(out["A"])["apple"] == pytest.approx(TWO_LN_TWO_POINT_FIVE, abs=1e-9)

    def test_empty_mapping_rejected(self):
        with pytest.raises(ValueError):
            ctfidf({})

    def test_scaling_preserves_ranking(self):
        base = {"A": Counter({"x": 5, "y": 3, "z": 1}),
                "B": Counter({"y": 4, "w": 2})}
        ranks = {c: [t for t, _ in lst] for c, lst in ctfidf(base).items()}
        for k in (2, 3, 7):
            scaled = {c: Counter({t: n * k for t, n in cnt.items()})
                      for c, cnt in base.items()}
            got = {c: [t for t, _ in lst] for c, lst in ctfidf(scaled).items()}
            assert got == ranks


class TestReduceDimensions:
    def test_target_equal_dim_returns_copy(self):
        vecs = [[1.0, 2.0], [3.0, 4.0]]
        out = reduce_dimensions(vecs, 2)
        assert np.allclose(out, vecs)
        out[0][0] = 99.0
        assert vecs[0][0] == 1.0

    def test_single_row_passthrough(self):
        out = reduce_dimensions([[1.0, 2.0, 3.0]], 2)
        assert out.shape == (1, 3)

    def test_shape_and_determinism(self):
        rng = np.random.default_rng(7)
        vecs = rng.normal(size=(20, 8)).tolist()
        a = reduce_dimensions(vecs, 3, seed=0)
        b = reduce_dimensions(vecs, 3, seed=0)
        assert a.shape == (20, 3)
        assert np.array_equal(a, b)

    def test_matches_svd_oracle_up_to_sign(self):
        rng = np.random.default_rng(11)
        data = rng.normal(size=(30, 6))
        out = reduce_dimensions(data.tolist(), 2)
        centered = data - data.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        oracle = centered @ vt[:2].T
        for j in range(2):
            col, ocol = out[:, j], oracle[:, j]
            assert (np.allclose(col, ocol, atol=1e-8)
                    or np.allclose(col, -ocol, atol=1e-8))

    def test_preserves_pairwise_distances_when_rank_small(self):
        # Points living in a 2-d affine subspace of R^6 keep distances
        # exactly under projection to 2 components.
        rng = np.random.default_rng(3)
        basis = rng.normal(size=(2, 6))
        coeffs = rng.normal(size=(15, 2))
        data = coeffs @ basis + 5.0
        out = reduce_dimensions(data.tolist(), 2)
        for i in range(5):
            for j in range(i + 1, 5):
                orig = np.linalg.norm(data[i] - data[j])
                proj = np.linalg.norm(out[i] - out[j])
                assert proj == pytest.approx(orig, abs=1e-8)

    def test_bad_target_dim(self):
        with pytest.raises(ValueError):
            reduce_dimensions([[1.0, 2.0]], 0)
        with pytest.raises(ValueError):
            reduce_dimensions([[1.0, 2.0], [2.0, 1.0]], 3)


class TestCluster:
    def test_identical_points_form_one_cluster(self):
        # n == min_cluster_size identical points: every point has n
        # neighbors at distance zero (self included).
        labels = cluster([[0.0, 0.0]] * 4, min_cluster_size=4)
        assert labels == [0, 0, 0, 0]

    def test_two_groups_and_noise(self):
        # 0.25 spacing is exact in binary, so side lengths are identical in
        # both squares and the percentile radius has no rounding asymmetry.
        pts = ([[0.0, 0.0], [0.25, 0.0], [0.0, 0.25], [0.25, 0.25]]
               + [[5.0, 5.0], [5.25, 5.0], [5.0, 5.25], [5.25, 5.25]]
               + [[100.0, 100.0]])
        labels = cluster(pts, min_cluster_size=3)
        assert labels[:4] == [0] * 4
        assert labels[4:8] == [1] * 4
        assert labels[8] == -1

    def test_labels_renumbered_by_first_occurrence(self):
        pts = [[10.0, 10.0]] * 4 + [[0.0, 0.0]] * 4
        labels = cluster(pts, min_cluster_size=3)
        assert labels[0] == 0 and labels[4] == 1

    def test_small_cluster_dissolves(self):
        # min size 5: two groups of four are too small and dissolve.
        pts = [[0.0, 0.0]] * 4 + [[50.0, 50.0]] * 4
        labels = cluster(pts, min_cluster_size=5)
        assert labels == [-1] * 8

    def test_empty_input(self):
        assert cluster([], min_cluster_size=2) == []

    def test_min_size_validated(self):
        with pytest.raises(ValueError):
            cluster([[0.0]], min_cluster_size=1)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
                    min_size=2, max_size=40),
           st.integers(min_value=2, max_value=6))
    def test_invariants(self, pts, min_size):
        labels = cluster([list(p) for p in pts], min_cluster_size=min_size)
        assert len(labels) == len(pts)
        counts = Counter(l for l in labels if l != -1)
        # surviving clusters meet the size floor and are numbered densely
        assert all(c >= min_size for c in counts.values())
        assert sorted(counts) == list(range(len(counts)))


class TestEmbeddingProvider:
    def test_unit_norm_or_zero(self):
        provider = HashedEmbeddingProvider(dim=16, seed=0)
        vecs = provider.embed_batch(["Debatte um Migration", "und", ""])
        assert np.linalg.norm(vecs[0]) == pytest.approx(1.0)
        assert np.linalg.norm(vecs[1]) == 0.0  # stopword only -> zero vector
        assert np.linalg.norm(vecs[2]) == 0.0

    def test_deterministic_and_seed_sensitive(self):
        text = ["Debatte um Migration und Grenzen"]
        a = HashedEmbeddingProvider(seed=0).embed_batch(text)
        b = HashedEmbeddingProvider(seed=0).embed_batch(text)
        c = HashedEmbeddingProvider(seed=1).embed_batch(text)
        assert a == b
        assert a != c

    def test_dim_validated(self):
        with pytest.raises(ValueError):
            HashedEmbeddingProvider(dim=0)


class TestTopicConfig:
    def test_defaults(self):
        cfg = TopicConfig()
        assert (cfg.target_dim, cfg.min_cluster_size, cfg.top_n_terms,
                cfg.seed, cfg.window_days) == (5, 10, 10, 0, 14)

    def test_validation(self):
        with pytest.raises(ValueError):
            TopicConfig(min_cluster_size=1)
        with pytest.raises(ValueError):
            TopicConfig(target_dim=0)
        with pytest.raises(ValueError):
            TopicConfig(window_days=0)


class TestSnapshot:
    def test_round_trip(self):
        snap = TopicSnapshot(day=date(2025, 3, 3), topic_id=1,
                             terms=(("b", 2.0), ("a", 1.0)), size=4,
                             doc_ids=("p1", "p2"))
        assert TopicSnapshot.from_dict(snap.to_dict()) == snap

    def test_weights_must_be_non_increasing(self):
        with pytest.raises(ValueError):
            TopicSnapshot(day=date(2025, 3, 3), topic_id=0,
                          terms=(("a", 1.0), ("b", 2.0)), size=1)

    def test_negative_size_rejected(self):
        with pytest.raises(ValueError):
            TopicSnapshot(day=date(2025, 3, 3), topic_id=0, terms=(), size=-1)


def _corpus():
    """Two obvious themes (8 near-identical docs each) plus one outlier."""
    posts = []
    for i in range(8):
        posts.append(make_classified(make_post(
            f"a{i}", "Der Apfel und die Birne liegen im Korb im Garten",
            day="2025-03-0" + str(3 + i % 2))))
    for i in range(8):
        posts.append(make_classified(make_post(
            f"b{i}", "Das Auto und der Motor stehen in der Garage bereit",
            day="2025-03-0" + str(3 + i % 2))))
    posts.append(make_classified(make_post(
        "x0", "Völlig anderes Thema ohne jede Wiederholung heute", day="2025-03-03")))
    return posts


class TestModelWindow:
    CFG = TopicConfig(min_cluster_size=4, seed=0)

    def test_recovers_two_topics(self):
        model = model_window(_corpus(), HashedEmbeddingProvider(seed=0), self.CFG)
        by_topic = Counter(model.assignments.values())
        non_noise = {t for t in by_topic if t != -1}
        assert non_noise == {0, 1}
        assert by_topic[0] == 8 and by_topic[1] == 8
        apple_terms = [t for t, _ in model.topics[0]]
        assert "apfel" in apple_terms and "birne" in apple_terms

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            model_window([], HashedEmbeddingProvider(), self.CFG)

    def test_snapshot_sizes_match_assignments(self):
        posts = _corpus()
        model = model_window(posts, HashedEmbeddingProvider(seed=0), self.CFG)
        snaps = daily_snapshots(model.assignments, posts, self.CFG)
        days = {cp.post.day for cp in posts}
        topics = {t for t in model.assignments.values() if t != -1}
        assert len(snaps) == len(days) * len(topics)
        for snap in snaps:
            assert snap.size == len(snap.doc_ids)
            assert list(snap.doc_ids) == sorted(snap.doc_ids)
            for pid in snap.doc_ids:
                assert model.assignments[pid] == snap.topic_id
        by_day_total = Counter()
        for snap in snaps:
            by_day_total[snap.day] += snap.size
        for day in days:
            expected = sum(1 for cp in posts
                           if cp.post.day == day and model.assignments[cp.post.id] != -1)
            assert by_day_total[day] == expected

    def test_daily_snapshots_requires_assignments(self):
        posts = _corpus()
        with pytest.raises(ValueError):
            daily_snapshots({}, posts, self.CFG)
