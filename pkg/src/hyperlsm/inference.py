"""Error metrics, model comparison and bootstrap inference on the curvature."""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.stats import rankdata

from .exceptions import DimensionError, DivergenceError, HyperLSMError, UndefinedAUCError
from .initialization import InitConfig, canonicalize, initial_distances, initialize, initialize_euclidean
from .model import DEFAULT_LINK, EUCLIDEAN, HYPERBOLIC, distance_matrix, log_likelihood, probability_matrix
from .netgen import generate_network, make_rng
from .optim import FitConfig, fit, fit_euclidean

log = logging.getLogger(__name__)


@dataclass
class ErrorReport:
    delta_K: float
    delta_Z: float
    delta_Theta: float
    delta_P: float


@dataclass
class LrtReport:
    """Bootstrap likelihood-ratio test of ``k = 0`` (Euclidean) against ``k > 0``.

    ``B`` is the number of bootstrap replicates that finished; ``failed``
    counts the excluded ones.
    """

    statistic: float
    bootstrap_statistics: List[float]
    p_value: float
    B: int
    failed: int = 0
    loglik_euclidean: float = np.nan
    loglik_hyperbolic: float = np.nan


@dataclass
class CiReport:
    k_hat: float
    bootstrap_estimates: List[float]
    interval: Tuple[float, float]
    level: float = 0.95
    B: int = 0
    failed: int = 0


@dataclass
class Estimate:
    """A fitted model together with its log-likelihood."""

    embedding: object
    loglik: float
    loss_history: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _rel_sq(est, truth):
    denom = np.sum(truth**2)
    return float(np.sum((est - truth) ** 2) / denom) if denom > 0 else float(np.sum((est - truth) ** 2))


def relative_errors(truth, est, link=DEFAULT_LINK):
    """Relative squared Frobenius errors of an estimate against the truth.

    Both embeddings are put in canonical form. Canonical columns are only
    defined up to sign, so ``delta_Z`` is the minimum over all column sign
    patterns. ``delta_K`` is an absolute error.
    """
    if truth.Z.shape != est.Z.shape:
        raise DimensionError(f"shape mismatch: {truth.Z.shape} vs {est.Z.shape}")
    if truth.is_hyperbolic != est.is_hyperbolic:
        raise DimensionError("truth and estimate use different geometries")
    if truth.is_hyperbolic:
        Zt, Ze = canonicalize(truth).Z, canonicalize(est).Z
        delta_K = abs(est.k - truth.k)
    else:
        Zt, Ze = truth.Z, est.Z
        delta_K = 0.0
    delta_Z = min(
        _rel_sq(Ze * np.array(signs), Zt) for signs in itertools.product((1.0, -1.0), repeat=Zt.shape[1])
    )
    return ErrorReport(
        delta_K=float(delta_K),
        delta_Z=delta_Z,
        delta_Theta=_rel_sq(distance_matrix(est), distance_matrix(truth)),
        delta_P=_rel_sq(probability_matrix(est, link), probability_matrix(truth, link)),
    )


def theorem1_bound(k, k_prime):
    """Shape ``(1 - min(sqrt(k'/k), sqrt(k/k')))^2`` of the misspecification bound."""
    if k <= 0 or k_prime <= 0:
        raise ValueError("curvatures must be positive")
    r = np.sqrt(k_prime / k)
    return float((1.0 - min(r, 1.0 / r)) ** 2)


def auc(scores, labels):
    """Probability that a positive outranks a negative, ties counted half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("held-out pairs contain a single class")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def holdout_mask(n, fraction, rng):
    """Symmetric 0/1 mask hiding ``round(fraction * n(n-1)/2)`` unordered pairs."""
    iu = np.triu_indices(n, 1)
    n_hide = int(round(fraction * iu[0].size))
    hide = rng.choice(iu[0].size, size=n_hide, replace=False)
    mask = np.ones((n, n))
    mask[iu[0][hide], iu[1][hide]] = 0.0
    mask[iu[1][hide], iu[0][hide]] = 0.0
    np.fill_diagonal(mask, 0.0)
    return mask


def link_prediction_auc(net, d, init_cfg=None, fit_cfg=None, link=DEFAULT_LINK, holdout_fraction=0.2, seed=0,
                        geometry=HYPERBOLIC):
    """Hold out a random fraction of pairs, fit on the rest, score the held-out pairs."""
    if net.n < 3:
        raise ValueError("link prediction needs at least 3 nodes")
    if not 0 < holdout_fraction < 1:
        raise ValueError("holdout_fraction must lie in (0, 1)")
    mask = holdout_mask(net.n, holdout_fraction, make_rng(seed))
    iu = np.triu_indices(net.n, 1)
    held = mask[iu] == 0
    labels = net.adjacency[iu][held]
    if labels.min() == labels.max():
        raise UndefinedAUCError("held-out pairs contain a single class")
    est = estimate(net.with_mask(mask), d, init_cfg, fit_cfg, link, geometry)
    P = probability_matrix(est.embedding, link)
    return auc(P[iu][held], labels)


def information_criteria(loglik, n, d, geometry=HYPERBOLIC):
    """``(BIC, AIC)`` with ``n d`` (+1 for the curvature) parameters and ``n(n-1)/2`` observations."""
    if not np.isfinite(loglik):
        raise ValueError("log-likelihood must be finite")
    p = n * d + (1 if geometry == HYPERBOLIC else 0)
    m = n * (n - 1) / 2.0
    return -2.0 * loglik + p * np.log(m), -2.0 * loglik + 2.0 * p


def estimate(net, d, init_cfg=None, fit_cfg=None, link=DEFAULT_LINK, geometry=HYPERBOLIC, theta0=None):
    """Initialize and fit one geometry; hyperbolic fits are returned canonicalized."""
    init_cfg = init_cfg or InitConfig()
    fit_cfg = fit_cfg or FitConfig()
    if theta0 is None:
        theta0 = initial_distances(net, init_cfg, fit_cfg, link)
    if geometry == EUCLIDEAN:
        res = fit_euclidean(net, initialize_euclidean(net, d, init_cfg, fit_cfg, link, theta0), fit_cfg, link)
        emb = res.embedding
    else:
        res = fit(net, initialize(net, d, init_cfg, fit_cfg, link, theta0), fit_cfg, link)
        emb = canonicalize(res.embedding)
    return Estimate(emb, log_likelihood(emb, net, link), res.loss_history, res.iterations, res.converged)


def _lrt_statistic(net, d, init_cfg, fit_cfg, link):
    theta0 = initial_distances(net, init_cfg, fit_cfg, link)
    euc = estimate(net, d, init_cfg, fit_cfg, link, EUCLIDEAN, theta0)
    hyp = estimate(net, d, init_cfg, fit_cfg, link, HYPERBOLIC, theta0)
    return 2.0 * max(0.0, hyp.loglik - euc.loglik), euc, hyp


def _run_replicates(task, B, n_jobs):
    if n_jobs is None or n_jobs == 1:
        return [task(b) for b in range(B)]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(task)(b) for b in range(B))


def _guarded(fn):
    def run(b):
        try:
            return fn(b)
        except (DivergenceError, HyperLSMError, FloatingPointError) as exc:
            log.warning("bootstrap replicate %d failed: %s", b, exc)
            return None

    return run


def lrt_test(net, d, B=100, init_cfg=None, fit_cfg=None, link=DEFAULT_LINK, seed=0, n_jobs=None):
    """Parametric bootstrap likelihood-ratio test of Euclidean against hyperbolic geometry.

    The statistic is ``2 * max(0, l_H - l_E)`` with maximized log-likelihoods
    of both fits. Replicate networks are drawn from the fitted Euclidean
    embedding, replicate ``b`` using the random stream ``(seed, b)``. The
    p-value is ``(#{stat_b >= stat} + 1) / (B + 1)`` over the replicates that
    finished.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    init_cfg = init_cfg or InitConfig()
    fit_cfg = fit_cfg or FitConfig()
    stat, euc, hyp = _lrt_statistic(net, d, init_cfg, fit_cfg, link)
    P = probability_matrix(euc.embedding, link)

    def replicate(b):
        boot = generate_network(euc.embedding, link, make_rng(seed, b), P=P)
        return _lrt_statistic(boot, d, init_cfg, fit_cfg, link)[0]

    results = _run_replicates(_guarded(replicate), B, n_jobs)
    stats = [s for s in results if s is not None]
    done = len(stats)
    if done == 0:
        raise DivergenceError(0, "every bootstrap replicate failed")
    p = (sum(s >= stat for s in stats) + 1) / (done + 1)
    return LrtReport(stat, stats, float(p), done, B - done, euc.loglik, hyp.loglik)


def percentile_interval(values, level):
    """Equal-tailed percentile interval of ``values``."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    alpha = 1.0 - level
    lo, hi = np.quantile(np.asarray(values, dtype=float), [alpha / 2.0, 1.0 - alpha / 2.0])
    return float(lo), float(hi)


def bootstrap_ci(net, d, B=100, level=0.95, init_cfg=None, fit_cfg=None, link=DEFAULT_LINK, seed=0,
                 n_jobs=None):
    """Percentile bootstrap interval for the curvature.

    Networks are drawn from the fitted ``(k, Z)``; replicate ``b`` uses the
    random stream ``(seed, b)`` and is refit with the full pipeline.
    """
    if B < 20:
        raise ValueError("B must be at least 20")
    init_cfg = init_cfg or InitConfig()
    fit_cfg = fit_cfg or FitConfig()
    est = estimate(net, d, init_cfg, fit_cfg, link)
    P = probability_matrix(est.embedding, link)

    def replicate(b):
        boot = generate_network(est.embedding, link, make_rng(seed, b), P=P)
        return estimate(boot, d, init_cfg, fit_cfg, link).embedding.k

    results = _run_replicates(_guarded(replicate), B, n_jobs)
    ks = [k for k in results if k is not None]
    if not ks:
        raise DivergenceError(0, "every bootstrap replicate failed")
    return CiReport(est.embedding.k, ks, percentile_interval(ks, level), level, len(ks), B - len(ks))
