import itertools

import numpy as np
import pytest

from hyperlsm.exceptions import DimensionError, UndefinedAUCError
from hyperlsm.geometry import random_isometry
from hyperlsm.inference import (
    ErrorReport,
    auc,
    bootstrap_ci,
    estimate,
    holdout_mask,
    information_criteria,
    link_prediction_auc,
    lrt_test,
    percentile_interval,
    relative_errors,
    theorem1_bound,
)
from hyperlsm.initialization import InitConfig, canonicalize
from hyperlsm.model import EUCLIDEAN, LatentEmbedding, probability_matrix
from hyperlsm.netgen import SimConfig, make_rng, simulate
from hyperlsm.optim import FitConfig

from .conftest import random_points

# small budgets keep the bootstrap tests fast
FAST_INIT = InitConfig(prefit_dim=None, candidate_iters=20)
FAST_FIT = FitConfig(max_iters=60)


class TestRelativeErrors:
    def test_identity(self, rng):
        emb = LatentEmbedding(random_points(rng, 20), 1.3)
        assert relative_errors(emb, emb) == ErrorReport(0.0, 0.0, 0.0, 0.0)

    def test_rotation_invariant(self, rng):
        emb = LatentEmbedding(random_points(rng, 30), 1.0)
        rot = LatentEmbedding(emb.Z @ random_isometry(2, rng, 0.7).T, 1.0)
        err = relative_errors(emb, canonicalize(rot))
        assert err.delta_Theta <= 1e-8 and err.delta_P <= 1e-8 and err.delta_Z <= 1e-8

    def test_sign_flip_minimised(self, rng):
        can = canonicalize(LatentEmbedding(random_points(rng, 30), 1.0))
        flipped = LatentEmbedding(can.Z * [-1.0, 1.0, 1.0], 1.0)
        assert relative_errors(can, flipped).delta_Z <= 1e-12

    def test_delta_k(self, rng):
        emb = LatentEmbedding(random_points(rng, 10), 1.0)
        assert relative_errors(emb, emb.with_k(1.4)).delta_K == pytest.approx(0.4)

    def test_delta_p_by_hand(self):
        # three nodes on a geodesic; compare against direct arithmetic
        Z = np.array([[0.0, 0.0, 1.0], [np.sinh(1), 0, np.cosh(1)], [np.sinh(2), 0, np.cosh(2)]])
        truth, est = LatentEmbedding(Z, 1.0), LatentEmbedding(Z, 2.0)
        P, Ph = probability_matrix(truth), probability_matrix(est)
        E = Ph - P
        assert relative_errors(truth, est).delta_P == pytest.approx(np.sum(E**2) / np.sum(P**2))

    def test_dimension_mismatch(self, rng):
        a = LatentEmbedding(random_points(rng, 10), 1.0)
        with pytest.raises(DimensionError):
            relative_errors(a, LatentEmbedding(random_points(rng, 11), 1.0))
        with pytest.raises(DimensionError):
            relative_errors(a, LatentEmbedding(rng.normal(size=(10, 3)), None, EUCLIDEAN))

    def test_non_negative(self, rng):
        err = relative_errors(LatentEmbedding(random_points(rng, 15), 1.0),
                              LatentEmbedding(random_points(rng, 15), 0.5))
        assert min(vars(err).values()) >= 0


class TestTheorem1Bound:
    def test_values(self):
        assert theorem1_bound(1.0, 1.0) == 0.0
        assert theorem1_bound(1.5, 1.0) == pytest.approx((1 - np.sqrt(2 / 3)) ** 2)
        assert theorem1_bound(1.5, 1.0) == pytest.approx(0.0337, abs=5e-5)

    def test_symmetric_and_monotone(self):
        for a, b in [(0.3, 2.0), (1.5, 1.75), (4.0, 0.1)]:
            assert theorem1_bound(a, b) == pytest.approx(theorem1_bound(b, a))
        ratios = np.exp(np.linspace(0.01, 3, 50))
        vals = [theorem1_bound(1.0, r) for r in ratios]
        assert np.all(np.diff(vals) > 0)
        assert all(theorem1_bound(1.0, r) > 0 for r in ratios)

    def test_invalid(self):
        with pytest.raises(ValueError):
            theorem1_bound(0.0, 1.0)


def brute_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p, q in itertools.product(pos, neg))
    return wins / (len(pos) * len(neg))


class TestAuc:
    def test_perfect_and_constant(self):
        assert auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 1.0
        assert auc([0.3] * 5, [1, 0, 1, 0, 0]) == 0.5

    def test_hand_example(self):
        scores = [0.9, 0.4, 0.6, 0.4, 0.1]
        labels = [1, 1, 0, 0, 0]
        # pairs: (0.9 beats all 3) + (0.4 vs 0.6 loses, ties 0.4, beats 0.1)
        assert auc(scores, labels) == pytest.approx((3 + 1.5) / 6)
        assert auc(scores, labels) == brute_auc(scores, labels)

    def test_random_against_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            m = int(rng.integers(2, 21))
            labels = rng.random(m) < 0.4
            if labels.all() or not labels.any():
                continue
            scores = rng.integers(0, 5, size=m) / 4.0
            assert auc(scores, labels) == pytest.approx(brute_auc(scores, labels), abs=1e-12)

    def test_single_class(self):
        with pytest.raises(UndefinedAUCError):
            auc([0.1, 0.2], [1, 1])

    def test_holdout_mask(self):
        mask = holdout_mask(10, 0.2, make_rng(3))
        np.testing.assert_array_equal(mask, mask.T)
        assert np.all(np.diag(mask) == 0)
        assert (mask[np.triu_indices(10, 1)] == 0).sum() == 9

    def test_link_prediction_brute_force(self):
        # with at most 20 held-out pairs, compare against direct enumeration
        truth, net = simulate(SimConfig(n=8, k=1.0, seed=4, radius=2.0))
        frac = 0.5
        value = link_prediction_auc(net, 2, FAST_INIT, FAST_FIT, holdout_fraction=frac, seed=1)
        mask = holdout_mask(8, frac, make_rng(1))
        iu = np.triu_indices(8, 1)
        held = mask[iu] == 0
        assert held.sum() <= 20
        est = estimate(net.with_mask(mask), 2, FAST_INIT, FAST_FIT)
        P = probability_matrix(est.embedding)
        assert value == pytest.approx(brute_auc(P[iu][held], net.adjacency[iu][held]))

    def test_link_prediction_informative(self):
        _, net = simulate(SimConfig(n=120, k=1.0, seed=2))
        assert link_prediction_auc(net, 2, seed=0) > 0.75

    def test_link_prediction_single_class(self):
        _, net = simulate(SimConfig(n=6, k=1.0, seed=0, radius=0.0))
        with pytest.raises(UndefinedAUCError):
            link_prediction_auc(net, 2, holdout_fraction=0.3)

    def test_small_network(self):
        _, net = simulate(SimConfig(n=2, k=1.0))
        with pytest.raises(ValueError):
            link_prediction_auc(net, 2)


class TestInformationCriteria:
    def test_unit(self):
        # n = 2 gives m = 1; check the formula pieces instead
        bic, aic = information_criteria(0.0, 2, 1, EUCLIDEAN)
        assert bic == pytest.approx(2 * np.log(1.0)) and aic == 4.0

    def test_unit_log_m(self):
        # p = 1 and m = e cannot both hold for integer n; emulate by difference
        b_h, a_h = information_criteria(-10.0, 30, 2, "hyperbolic")
        b_e, a_e = information_criteria(-10.0, 30, 2, EUCLIDEAN)
        assert b_h - b_e == pytest.approx(np.log(30 * 29 / 2))
        assert a_h - a_e == pytest.approx(2.0)

    def test_large_network(self):
        bic, aic = information_criteria(-1.491e5, 1158, 2, "hyperbolic")
        assert bic == pytest.approx(3.293e5, rel=5e-4)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            information_criteria(np.nan, 10, 2)


class TestBootstrap:
    def test_lrt_properties(self):
        _, net = simulate(SimConfig(n=40, k=None, seed=3))
        rep = lrt_test(net, 2, B=4, init_cfg=FAST_INIT, fit_cfg=FAST_FIT, seed=1)
        assert rep.statistic >= 0 and all(s >= 0 for s in rep.bootstrap_statistics)
        assert rep.B + rep.failed == 4
        count = sum(s >= rep.statistic for s in rep.bootstrap_statistics)
        assert rep.p_value == (count + 1) / (rep.B + 1)
        assert rep.statistic == pytest.approx(2 * max(0.0, rep.loglik_hyperbolic - rep.loglik_euclidean))

    def test_lrt_deterministic(self):
        _, net = simulate(SimConfig(n=30, k=1.0, seed=3))
        a = lrt_test(net, 2, B=3, init_cfg=FAST_INIT, fit_cfg=FAST_FIT, seed=5)
        b = lrt_test(net, 2, B=3, init_cfg=FAST_INIT, fit_cfg=FAST_FIT, seed=5)
        assert a == b

    def test_lrt_parallel_matches_serial(self):
        _, net = simulate(SimConfig(n=30, k=1.0, seed=3))
        a = lrt_test(net, 2, B=3, init_cfg=FAST_INIT, fit_cfg=FAST_FIT, seed=5)
        b = lrt_test(net, 2, B=3, init_cfg=FAST_INIT, fit_cfg=FAST_FIT, seed=5, n_jobs=2)
        assert a == b

    def test_lrt_invalid(self):
        _, net = simulate(SimConfig(n=20, seed=3))
        with pytest.raises(ValueError):
            lrt_test(net, 2, B=0)

    def test_ci(self):
        _, net = simulate(SimConfig(n=40, k=1.0, seed=8))
        rep = bootstrap_ci(net, 2, B=20, init_cfg=FAST_INIT, fit_cfg=FAST_FIT, seed=2)
        lo, hi = rep.interval
        assert lo <= hi and rep.B + rep.failed == 20
        again = bootstrap_ci(net, 2, B=20, init_cfg=FAST_INIT, fit_cfg=FAST_FIT, seed=2)
        assert again == rep

    def test_ci_invalid(self):
        _, net = simulate(SimConfig(n=20, seed=3))
        with pytest.raises(ValueError):
            bootstrap_ci(net, 2, B=10)

    def test_percentile_interval(self):
        assert percentile_interval([1.3] * 30, 0.95) == (1.3, 1.3)
        vals = np.random.default_rng(0).normal(size=200)
        lo90, hi90 = percentile_interval(vals, 0.9)
        lo99, hi99 = percentile_interval(vals, 0.99)
        assert lo99 <= lo90 <= hi90 <= hi99
        with pytest.raises(ValueError):
            percentile_interval(vals, 1.0)


class TestEstimate:
    def test_hyperbolic_canonical(self):
        _, net = simulate(SimConfig(n=60, k=1.0, seed=1))
        est = estimate(net, 2, FAST_INIT, FAST_FIT)
        G = est.embedding.Z.T @ est.embedding.Z
        assert np.abs(G - np.diag(np.diag(G))).max() <= 1e-8 * np.abs(G).max()
        assert est.loglik < 0

    def test_euclidean(self):
        _, net = simulate(SimConfig(n=60, k=1.0, seed=1))
        est = estimate(net, 2, FAST_INIT, FAST_FIT, geometry=EUCLIDEAN)
        assert not est.embedding.is_hyperbolic
