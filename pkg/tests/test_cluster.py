import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import finite_difference, max_relative_error
from sumhis.cluster import (
    ClusterModel,
    ClusterTrainConfig,
    FilterConfig,
    aspect_words,
    assignment_purity,
    attention_weights,
    cluster_loss,
    cluster_loss_grad,
    filter_sentences,
    kmeans_init,
    leading_cluster,
    leading_weight,
    ortho_reg,
    ortho_reg_grad,
    reconstruct,
    train_cluster,
)
from sumhis.errors import ConfigError, DimensionError, InputError, TrainingError
from sumhis.rank import SentenceRanking

E = math.e
TWO = ClusterModel(np.eye(2))


class TestAttention:
    def test_uniform_when_scores_equal(self):
        m = ClusterModel(np.array([[1.0, 0, 0], [0, 1.0, 0], [2.0, -1.0, 0]]))
        np.testing.assert_allclose(attention_weights(m, [0, 0, 1.0]), [1 / 3] * 3, atol=1e-15)

    def test_worked_case(self):
        p = attention_weights(TWO, [1.0, 0.0])
        np.testing.assert_allclose(p, [E / (E + 1), 1 / (E + 1)], rtol=1e-12)
        np.testing.assert_allclose(p, [0.7311, 0.2689], atol=1e-4)

    def test_scaling_sharpens(self):
        q = np.array([0.6, 0.2])
        p1, p10 = attention_weights(TWO, q), attention_weights(TWO, 10 * q)
        assert p10.argmax() == p1.argmax() == 0
        assert p10[0] > p1[0]

    def test_large_scores_stable(self):
        p = attention_weights(ClusterModel(np.array([[1000.0, 0], [0, 1000.0]])), [1.0, 0.99])
        assert np.isfinite(p).all() and p.sum() == pytest.approx(1.0)

    def test_dimension_checked(self):
        with pytest.raises(DimensionError):
            attention_weights(TWO, [1.0, 0, 0])


class TestReconstruct:
    def test_single_cluster(self):
        m = ClusterModel(np.array([[0.3, -2.0]]))
        for q in ([1, 0], [-5, 3]):
            np.testing.assert_array_equal(reconstruct(m, attention_weights(m, q)), [0.3, -2.0])

    def test_one_hot(self):
        m = ClusterModel(np.array([[1.0, 2], [3, 4], [5, 6]]))
        np.testing.assert_array_equal(reconstruct(m, [0, 1.0, 0]), [3, 4])

    def test_half_half(self):
        m = ClusterModel(np.array([[2.0, 0], [0, 2.0]]))
        np.testing.assert_array_equal(reconstruct(m, [0.5, 0.5]), [1, 1])

    def test_weight_sum_checked(self):
        with pytest.raises(ValueError):
            reconstruct(TWO, [0.5, 0.6])


class TestClusterLoss:
    one = ClusterModel(np.array([[1.0, 0.0]]))

    def test_parallel(self):
        assert cluster_loss(self.one, [3.0, 0]) == 0.0

    def test_orthogonal(self):
        assert cluster_loss(self.one, [0, 2.0]) == 1.0

    def test_antiparallel(self):
        assert cluster_loss(self.one, [-1.0, 0]) == 2.0

    def test_zero_reconstruction_is_one(self):
        assert cluster_loss(ClusterModel(np.zeros((2, 3))), [1.0, 2, 3]) == 1.0
        assert np.all(cluster_loss_grad(ClusterModel(np.zeros((2, 3))), [1.0, 2, 3]) == 0)

    def test_zero_query_rejected(self):
        with pytest.raises(ValueError):
            cluster_loss(self.one, [0.0, 0.0])

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            K, n = rng.integers(1, 5), rng.integers(2, 6)
            C, q = rng.normal(size=(K, n)), rng.normal(size=n)
            numeric = finite_difference(lambda X: cluster_loss(ClusterModel(X), q), C)
            assert max_relative_error(cluster_loss_grad(ClusterModel(C), q), numeric) < 1e-4


class TestOrtho:
    def test_orthonormal_rows(self):
        assert ortho_reg(ClusterModel(np.eye(3)[:2])) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal_unnormalized_rows(self):
        assert ortho_reg(ClusterModel(np.diag([3.0, 0.5]))) == pytest.approx(0.0, abs=1e-15)

    def test_identical_rows(self):
        assert ortho_reg(ClusterModel(np.array([[1.0, 0], [1.0, 0]]))) == pytest.approx(2.0)

    def test_single_row(self):
        assert ortho_reg(ClusterModel(np.array([[0.6, 0.8]]))) == pytest.approx(0.0, abs=1e-15)

    def test_zero_row(self):
        with pytest.raises(ValueError):
            ortho_reg(ClusterModel(np.array([[1.0, 0], [0, 0]])))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            C = rng.normal(size=(rng.integers(1, 5), rng.integers(2, 6)))
            numeric = finite_difference(lambda X: ortho_reg(ClusterModel(X)), C)
            assert max_relative_error(ortho_reg_grad(ClusterModel(C)), numeric) < 1e-4


def test_leading_weight():
    m = ClusterModel(np.array([[1.0, 0], [0, 1.0], [0, -1.0]]))
    assert leading_weight(m, [0.0, 0.0], 2) == pytest.approx(1 / 3)
    assert leading_weight(ClusterModel(np.eye(2)), [0.0, 0.0], 1) == pytest.approx(0.5)
    assert leading_weight(TWO, [1.0, 0.0], 0) == pytest.approx(0.7311, abs=1e-4)
    assert leading_weight(TWO, [40.0, 0.0], 0) == pytest.approx(1.0)
    with pytest.raises(IndexError):
        leading_weight(TWO, [1.0, 0], 2)


class TestKmeans:
    def test_k_equals_points(self):
        pts = [np.array([0.0, 1]), np.array([5.0, 5]), np.array([-3.0, 2])]
        centers = kmeans_init(pts, 3, seed=4)
        assert sorted(map(tuple, centers)) == sorted(map(tuple, pts))

    def test_two_blobs(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(100, 2)) * 0.3 + [5, 5]
        b = rng.normal(size=(100, 2)) * 0.3 + [-5, 0]
        centers = kmeans_init(np.vstack([a, b]), 2, seed=0)
        got = sorted(map(tuple, centers))
        want = sorted([tuple(b.mean(axis=0)), tuple(a.mean(axis=0))])
        np.testing.assert_allclose(got, want, atol=0.1)

    def test_single_cluster_is_mean(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(20, 4))
        np.testing.assert_allclose(kmeans_init(X, 1)[0], X.mean(axis=0), atol=1e-12)

    def test_too_few_distinct(self):
        with pytest.raises(InputError):
            kmeans_init([np.ones(2)] * 5, 2)


def unit(v):
    return v / np.linalg.norm(v)


class TestTrainCluster:
    def test_constant_direction_single_cluster(self):
        v = unit(np.array([1.0, 2.0, -0.5, 0.3]))
        m = train_cluster([v] * 100, ClusterTrainConfig(clusters=1, seed=1))
        assert cluster_loss(m, v) < 0.01
        assert m.history[-1] < 0.01

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 5))
        a = train_cluster(X, ClusterTrainConfig(clusters=3, seed=7))
        b = train_cluster(X, ClusterTrainConfig(clusters=3, seed=7))
        assert a.C.tobytes() == b.C.tobytes()

    def test_zero_vectors_skipped(self):
        rng = np.random.default_rng(5)
        X = list(rng.normal(size=(10, 3))) + [np.zeros(3)]
        assert train_cluster(X, ClusterTrainConfig(clusters=2)).K == 2
        with pytest.raises(TrainingError):
            train_cluster([np.zeros(3)])

    def test_empty(self):
        with pytest.raises(TrainingError):
            train_cluster([])

    def test_kmeans_init_and_ortho(self):
        rng = np.random.default_rng(6)
        dirs = np.eye(6)[:3]
        X = np.repeat(dirs, 30, axis=0) + 0.05 * rng.normal(size=(90, 6))
        m = train_cluster(X, ClusterTrainConfig(clusters=3, init="kmeans", ortho_weight=0.1))
        labels = np.repeat(np.arange(3), 30)
        assert assignment_purity([leading_cluster(m, x) for x in X], labels) >= 0.9
        assert ortho_reg(m) < 0.5

    def test_kmeans_needs_k_vectors(self):
        with pytest.raises(InputError):
            train_cluster([np.ones(3), np.ones(3) * 2], ClusterTrainConfig(clusters=3, init="kmeans"))

    def test_config_invariants(self):
        for bad in (dict(epochs=0), dict(learning_rate=0), dict(ortho_weight=-1), dict(clusters=0)):
            with pytest.raises(ConfigError):
                ClusterTrainConfig(**bad)


def make_ranking(indices):
    return SentenceRanking("d", tuple((i, float(-k)) for k, i in enumerate(indices)))


class TestFilter:
    doc_vec = np.array([1.0, 0.0])
    sent_vecs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.9, 0.1])]

    def test_threshold_zero_keeps_all(self):
        r = make_ranking([2, 0, 1])
        assert filter_sentences(TWO, r, self.doc_vec, self.sent_vecs, FilterConfig(0.0)) == r

    def test_near_one_falls_back_to_top(self):
        out = filter_sentences(TWO, make_ranking([1, 2, 0]), self.doc_vec, self.sent_vecs, FilterConfig(0.999))
        assert out.indices == [1] and out.fallback

    def test_no_fallback_when_disabled(self):
        out = filter_sentences(TWO, make_ranking([1, 0]), self.doc_vec, self.sent_vecs, FilterConfig(0.999),
                               fallback=False)
        assert out.indices == []

    def test_worked_weights(self):
        # sentence 1 weighs 1/(e+1) = 0.2689 on the leading cluster 0, sentence 0 weighs 0.7311
        r = make_ranking([0, 1])
        assert filter_sentences(TWO, r, self.doc_vec, self.sent_vecs, FilterConfig(0.25)).indices == [0, 1]
        assert filter_sentences(TWO, r, self.doc_vec, self.sent_vecs, FilterConfig(0.30)).indices == [0]

    def test_boundary_is_removed(self):
        m = ClusterModel(np.eye(2))
        out = filter_sentences(m, make_ranking([0]), self.doc_vec, [np.zeros(2)], FilterConfig(0.5), fallback=False)
        assert out.indices == []

    def test_leading_cluster_from_document(self):
        # the document leans to cluster 1; a sentence leading on cluster 0 is judged on cluster 1
        out = filter_sentences(TWO, make_ranking([0, 1]), np.array([0.0, 1.0]), self.sent_vecs, FilterConfig(0.5))
        assert out.indices == [1]

    def test_default_threshold(self):
        assert FilterConfig().threshold == 0.25
        with pytest.raises(ConfigError):
            FilterConfig(1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_subsequence_and_nested(self, rnd):
        rng = np.random.default_rng(rnd.randint(0, 2**32 - 1))
        m = ClusterModel(rng.normal(size=(4, 5)))
        vecs = list(rng.normal(size=(8, 5)))
        r = make_ranking(list(rng.permutation(8)))
        doc = rng.normal(size=5)
        previous = None
        for t in (0.0, 0.1, 0.2, 0.25, 0.4, 0.7, 0.95):
            out = filter_sentences(m, r, doc, vecs, FilterConfig(t), fallback=False)
            it = iter(r.indices)
            assert all(i in it for i in out.indices)
            if previous is not None:
                assert set(out.indices) <= previous
            previous = set(out.indices)


class TestAspectWords:
    def test_exact_vector_ranks_first(self):
        m = ClusterModel(np.array([[1.0, 2.0], [-1.0, 0.0]]))
        vocab = [("t", np.array([1.0, 2.0])), ("u", np.array([0.0, 1.0])), ("v", np.array([-1.0, 0.1]))]
        words = aspect_words(m, vocab, 2)
        assert words[0][0] == "t" and words[1][0] == "v"

    def test_top_m_larger_than_vocab(self):
        vocab = [("b", np.array([1.0, 0])), ("a", np.array([1.0, 0])), ("c", np.array([0.0, 1]))]
        assert aspect_words(ClusterModel(np.array([[1.0, 0]])), vocab, 10) == [["a", "b", "c"]]

    def test_trained_groups(self):
        rng = np.random.default_rng(9)
        dirs = np.eye(8)[:3]
        X = np.repeat(dirs, 50, axis=0) + 0.05 * rng.normal(size=(150, 8))
        m = train_cluster(X, ClusterTrainConfig(clusters=3, seed=2))
        vocab = [(f"g{g}w{k}", dirs[g] + 0.05 * rng.normal(size=8)) for g in range(3) for k in range(5)]
        for words in aspect_words(m, vocab, 4):
            assert len({w[:2] for w in words}) == 1

    def test_empty_vocab(self):
        with pytest.raises(InputError):
            aspect_words(TWO, [], 3)


def test_purity():
    assert assignment_purity([0, 0, 1, 1], [5, 5, 6, 6]) == 1.0
    assert assignment_purity([0, 0, 0, 0], [5, 5, 6, 6]) == 0.5


finite = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (4, 3), elements=finite), arrays(np.float64, 3, elements=finite))
def test_softmax_normalized_and_positive(C, q):
    p = attention_weights(ClusterModel(C), q)
    assert abs(p.sum() - 1.0) <= 1e-12
    assert np.all(p > 0)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (4, 3), elements=finite), arrays(np.float64, 3, elements=finite),
       st.floats(0.01, 50))
def test_argmax_scale_invariant(C, q, lam):
    scores = C @ q
    top = np.sort(scores)
    if top[-1] - top[-2] < 1e-9:
        return
    m = ClusterModel(C)
    assert attention_weights(m, q).argmax() == attention_weights(m, lam * q).argmax()


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (3, 4), elements=finite), arrays(np.float64, 4, elements=finite))
def test_loss_range(C, q):
    if not np.any(q):
        return
    assert 0.0 <= cluster_loss(ClusterModel(C), q) <= 2.0


def test_reconstruction_in_convex_hull():
    rng = np.random.default_rng(10)
    for _ in range(100):
        C = rng.normal(size=(3, 2))
        m = ClusterModel(C)
        o = reconstruct(m, attention_weights(m, rng.normal(size=2) * 3))
        # barycentric coordinates of o in the triangle spanned by the rows
        A = np.vstack([C.T, np.ones(3)])
        lam = np.linalg.solve(A, np.append(o, 1.0))
        assert np.all(lam >= -1e-9)
