"""Joint gradient descent on curvature and manifold gradient descent on positions."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import DivergenceError
from .geometry import exp_map, minkowski_diag, tangent_project
from .model import DEFAULT_LINK, EUCLIDEAN, LatentEmbedding, loss_and_gradients

log = logging.getLogger(__name__)

#: Loss increases larger than this are logged and the step is rejected.
INCREASE_TOL = 1e-8
# beyond this magnitude a node's probabilities all sit at the clip floor and
# the next gradient overflows, so such trial steps are treated as divergent
MAX_COORD = 1e30


@dataclass
class FitConfig:
    """Optimizer settings.

    ``eta_K`` and ``eta_Z`` default to ``1/n^2`` and ``1/n`` for an ``n``-node
    network. ``epsilon`` is the loss-decrease threshold that ends the run.

    ``backtrack`` is the number of times both step sizes may be halved when a
    step would increase the loss; the full step sizes are tried again on the
    next iteration. With ``backtrack=0`` the first increase ends the run and
    a non-finite loss raises immediately.
    """

    eta_K: Optional[float] = None
    eta_Z: Optional[float] = None
    epsilon: float = 1e-4
    max_iters: int = 2000
    k_bounds: Tuple[float, float] = (1e-3, 1e3)
    freeze_K: bool = False
    backtrack: int = 30

    def __post_init__(self):
        lo, hi = self.k_bounds
        if not 0 < lo < hi:
            raise ValueError(f"k_bounds must satisfy 0 < k_min < k_max, got {self.k_bounds}")
        for name in ("eta_K", "eta_Z"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.epsilon <= 0 or self.max_iters < 1:
            raise ValueError("epsilon must be positive and max_iters >= 1")
        if self.backtrack < 0:
            raise ValueError("backtrack must be non-negative")

    def steps(self, n):
        eta_K = self.eta_K if self.eta_K is not None else 1.0 / n**2
        eta_Z = self.eta_Z if self.eta_Z is not None else 1.0 / n
        return eta_K, eta_Z

    def replace(self, **changes):
        values = {**self.__dict__, **changes}
        return FitConfig(**values)


@dataclass
class FitResult:
    embedding: LatentEmbedding
    loss_history: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def loss(self):
        return self.loss_history[-1]


def riemannian_gradient(Z, euclid_grad):
    """Tangent-space gradient ``proj_z(L * grad)`` for every row."""
    return tangent_project(Z, euclid_grad * minkowski_diag(Z.shape[1] - 1))


def mgd_step(emb, net, link=DEFAULT_LINK, eta_Z=None, grad=None):
    """One manifold gradient step on all rows of ``Z`` simultaneously.

    ``grad`` may carry a precomputed Euclidean gradient at ``emb``.
    """
    if eta_Z is None:
        eta_Z = 1.0 / emb.n
    if grad is None:
        grad = loss_and_gradients(emb, net, link)[1]
    rgrad = riemannian_gradient(emb.Z, grad)
    return LatentEmbedding(exp_map(emb.Z, -eta_Z * rgrad), emb.k)


def fit(net, init, cfg=None, link=DEFAULT_LINK):
    """Minimise the loss over ``(k, Z)`` starting from ``init``.

    Both updates are evaluated at the current iterate; ``k`` is clipped to
    ``cfg.k_bounds`` after every step. The loop stops once the loss decrease
    is at most ``cfg.epsilon`` or after ``cfg.max_iters`` iterations.
    """
    cfg = cfg or FitConfig()
    if not init.is_hyperbolic:
        return fit_euclidean(net, init, cfg, link)
    eta_K, eta_Z = cfg.steps(net.n)
    lo, hi = cfg.k_bounds
    emb = init if lo <= init.k <= hi else init.with_k(float(np.clip(init.k, lo, hi)))

    def step(cur, gZ, gK, scale):
        k = cur.k if cfg.freeze_K else float(np.clip(cur.k - scale * eta_K * gK, lo, hi))
        rgrad = riemannian_gradient(cur.Z, gZ)
        return LatentEmbedding(exp_map(cur.Z, -scale * eta_Z * rgrad), k)

    return _descend(net, emb, cfg, link, step)


def fit_euclidean(net, init, cfg=None, link=DEFAULT_LINK):
    """Plain gradient descent for the Euclidean distance model."""
    cfg = cfg or FitConfig()
    if init.is_hyperbolic:
        raise ValueError("fit_euclidean needs a Euclidean embedding")
    _, eta_Z = cfg.steps(net.n)

    def step(cur, gZ, gK, scale):
        return LatentEmbedding(cur.Z - scale * eta_Z * gZ, None, EUCLIDEAN)

    return _descend(net, init, cfg, link, step)


def _descend(net, emb, cfg, link, step):
    loss, gZ, gK = loss_and_gradients(emb, net, link)
    if not np.isfinite(loss):
        raise DivergenceError(0)
    history = [loss]
    converged = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        trial = _try_step(net, emb, loss, gZ, gK, cfg, link, step, it)
        if trial is None:
            converged = True
            break
        new, new_loss, new_gZ, new_gK = trial
        delta = loss - new_loss
        emb, loss, gZ, gK = new, new_loss, new_gZ, new_gK
        history.append(loss)
        if delta <= cfg.epsilon:
            converged = True
            break
    return FitResult(emb, history, it, converged)


def _try_step(net, emb, loss, gZ, gK, cfg, link, step, it):
    """Accepted ``(embedding, loss, grad_Z, grad_k)``, or ``None`` if no step helps."""
    tol = INCREASE_TOL * max(1.0, abs(loss))
    scale = 1.0
    diverged = False
    for _ in range(cfg.backtrack + 1):
        try:
            # overflow in a trial step just means the step is too long
            with np.errstate(over="ignore", invalid="ignore"):
                new = step(emb, gZ, gK, scale)
                if np.abs(new.Z).max() > MAX_COORD:
                    raise FloatingPointError("coordinates out of range")
                new_loss, new_gZ, new_gK = loss_and_gradients(new, net, link)
        except (FloatingPointError, ValueError):
            new_loss = np.nan
        if not np.isfinite(new_loss):
            if cfg.backtrack == 0:
                raise DivergenceError(it)
            diverged = True
        elif new_loss <= loss + tol:
            return new, new_loss, new_gZ, new_gK
        else:
            diverged = False
            log.debug("iteration %d: step scale %g increased the loss by %.3g", it, scale, new_loss - loss)
        scale *= 0.5
    if diverged and cfg.backtrack:
        raise DivergenceError(it, "no step size gave a finite loss")
    if cfg.backtrack:
        log.info("iteration %d: loss increase at every tried step size; stopping", it)
    else:
        log.info("iteration %d increased the loss; stopping", it)
    return None
