"""Latent distance model: link functions, distance/probability matrices,
the negative log-likelihood and its analytic gradients.

The loss follows the ordered-pair convention: every unordered pair ``{i, j}``
contributes twice. Gradients are taken with respect to that loss.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.special import expit

from . import _kernels
from .exceptions import DimensionError, ManifoldError
from .geometry import ACOSH_SLACK, clamped_acosh, lorentz_inner, minkowski_diag

HYPERBOLIC = "hyperbolic"
EUCLIDEAN = "euclidean"

#: Probabilities are clipped to ``[PROB_CLIP, 1 - PROB_CLIP]`` before logs.
PROB_CLIP = 1e-12
#: Pairs with ``-<z_i, z_j>`` below ``1 + COINCIDENT`` (or Euclidean distance
#: below ``COINCIDENT``) get no gradient.
COINCIDENT = 1e-9


@dataclass(frozen=True)
class LinkFunction:
    """Strictly decreasing map from distances to probabilities.

    ``score`` is optional; when given it must equal
    ``derivative(x) / (forward(x) * (1 - forward(x)))`` and is used instead of
    the ratio because the ratio is ill-conditioned near ``x = 0``.
    """

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    score: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return self.forward(x)

    def score_of(self, x):
        if self.score is not None:
            return self.score(x)
        p = self.forward(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.derivative(x) / (p * (1.0 - p))

    def __reduce_ex__(self, protocol):
        # built-in links travel to worker processes by name so they keep
        # their identity and their compiled kernels
        if LINKS.get(self.name) is self:
            return get_link, (self.name,)
        return super().__reduce_ex__(protocol)


def _neg_inv_expm1(x):
    with np.errstate(divide="ignore"):
        return 1.0 / np.expm1(-np.asarray(x, dtype=float))


#: ``2 / (1 + e^x)``: probability 1 at distance 0.
LOGISTIC2 = LinkFunction(
    name="logistic2",
    forward=lambda x: 2.0 * expit(-np.asarray(x, dtype=float)),
    inverse=lambda p: np.log(2.0 / np.asarray(p, dtype=float) - 1.0),
    derivative=lambda x: -2.0 * expit(np.asarray(x, dtype=float)) * expit(-np.asarray(x, dtype=float)),
    score=_neg_inv_expm1,
)

#: ``e^{-x}``
EXPONENTIAL = LinkFunction(
    name="exp",
    forward=lambda x: np.exp(-np.asarray(x, dtype=float)),
    inverse=lambda p: -np.log(np.asarray(p, dtype=float)),
    derivative=lambda x: -np.exp(-np.asarray(x, dtype=float)),
    score=_neg_inv_expm1,
)

DEFAULT_LINK = LOGISTIC2
LINKS = {LOGISTIC2.name: LOGISTIC2, EXPONENTIAL.name: EXPONENTIAL}


def get_link(name):
    try:
        return LINKS[name]
    except KeyError:
        raise ValueError(f"unknown link {name!r}; choose from {sorted(LINKS)}") from None


@dataclass(frozen=True)
class LatentEmbedding:
    """Latent positions plus curvature.

    Hyperbolic embeddings hold an ``(n, d+1)`` matrix of hyperboloid points and
    a positive ``k``. Euclidean embeddings hold an unconstrained ``(n, d)``
    matrix and ``k = None``.
    """

    Z: np.ndarray
    k: Optional[float] = 1.0
    geometry: str = HYPERBOLIC

    def __post_init__(self):
        Z = np.array(self.Z, dtype=float)
        if Z.ndim != 2:
            raise DimensionError("Z must be a 2-d array")
        object.__setattr__(self, "Z", Z)
        if self.geometry == HYPERBOLIC:
            if self.k is None or not self.k > 0:
                raise ValueError(f"hyperbolic embedding needs k > 0, got {self.k!r}")
            object.__setattr__(self, "k", float(self.k))
            if Z.shape[1] < 3:
                raise DimensionError("hyperboloid coordinates need at least 3 columns")
            resid = np.abs(lorentz_inner(Z, Z) + 1.0)
            if Z.shape[0] and (np.any(resid > 1e-8 * np.maximum(1.0, Z[:, -1] ** 2)) or np.any(Z[:, -1] <= 0)):
                raise ManifoldError("rows of Z are not on the upper hyperboloid sheet")
        elif self.geometry == EUCLIDEAN:
            object.__setattr__(self, "k", None)
        else:
            raise ValueError(f"unknown geometry {self.geometry!r}")

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def d(self):
        """Intrinsic latent dimension."""
        return self.Z.shape[1] - 1 if self.geometry == HYPERBOLIC else self.Z.shape[1]

    @property
    def is_hyperbolic(self):
        return self.geometry == HYPERBOLIC

    def with_k(self, k):
        return LatentEmbedding(self.Z, k, self.geometry)

    @classmethod
    def unchecked(cls, Z, k=1.0, geometry=HYPERBOLIC):
        """Skip validation, e.g. to evaluate the loss at ambient perturbations of ``Z``."""
        emb = object.__new__(cls)
        object.__setattr__(emb, "Z", np.asarray(Z, dtype=float))
        object.__setattr__(emb, "k", k)
        object.__setattr__(emb, "geometry", geometry)
        return emb


@dataclass(frozen=True)
class Network:
    """Undirected simple graph as a dense 0/1 adjacency matrix.

    ``mask`` (optional) marks observed pairs with 1; unobserved pairs are left
    out of the likelihood.
    """

    adjacency: np.ndarray
    mask: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        A = np.asarray(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError("adjacency must be square")
        if not np.isin(A, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(A)):
            raise ValueError("adjacency must have a zero diagonal")
        object.__setattr__(self, "adjacency", A.astype(float))
        if self.mask is not None:
            M = np.asarray(self.mask)
            if M.shape != A.shape:
                raise DimensionError("mask shape differs from adjacency")
            if not np.isin(M, (0, 1)).all() or not np.array_equal(M, M.T) or np.any(np.diag(M)):
                raise ValueError("mask must be symmetric 0/1 with zero diagonal")
            object.__setattr__(self, "mask", M.astype(float))

    @property
    def n(self):
        return self.adjacency.shape[0]

    @property
    def n_edges(self):
        return int(self.adjacency.sum() // 2)

    def observed(self):
        """Matrix of observation weights (zero diagonal)."""
        if self.mask is not None:
            return self.mask
        return 1.0 - np.eye(self.n)

    def unmasked(self):
        return Network(self.adjacency)

    def with_mask(self, mask):
        return Network(self.adjacency, mask)

    @classmethod
    def from_edges(cls, n, edges):
        A = np.zeros((n, n), dtype=np.int8)
        edges = np.asarray(list(edges), dtype=int).reshape(-1, 2)
        A[edges[:, 0], edges[:, 1]] = 1
        A[edges[:, 1], edges[:, 0]] = 1
        return cls(A)

    def edges(self):
        """Sorted ``(i, j)`` pairs with ``i < j``."""
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return np.column_stack([i, j])


def _minus_gram(Z):
    """``-Z L Z^T``, with the diagonal forced to exactly 1."""
    diag = minkowski_diag(Z.shape[1] - 1)
    X = -(Z * diag) @ Z.T
    np.fill_diagonal(X, 1.0)
    return X


def _pair_acosh(X, Z):
    # round-off in -<z_i, z_j> grows with the product of the time coordinates
    t = Z[:, -1]
    return clamped_acosh(X, ACOSH_SLACK * np.maximum(1.0, np.outer(t, t)))


def distance_matrix(emb):
    """Pairwise latent distances with a zero diagonal."""
    if emb.is_hyperbolic:
        theta = _pair_acosh(_minus_gram(emb.Z), emb.Z) / np.sqrt(emb.k)
        np.fill_diagonal(theta, 0.0)
        return theta
    if emb.n < 2:
        return np.zeros((emb.n, emb.n))
    return squareform(pdist(emb.Z))


def probability_matrix(emb, link=DEFAULT_LINK):
    """Link probabilities ``sigma(Theta)`` with a zero diagonal."""
    P = link.forward(distance_matrix(emb))
    np.fill_diagonal(P, 0.0)
    return P


def _check_dims(emb, net):
    if emb.n != net.n:
        raise DimensionError(f"embedding has {emb.n} nodes, network has {net.n}")


def _loss_parts(theta, A, obs, link):
    """Loss and ``dL/dTheta`` (per unordered pair, factor 2 included)."""
    P = link.forward(theta)
    Pc = np.clip(P, PROB_CLIP, 1.0 - PROB_CLIP)
    with np.errstate(invalid="ignore"):
        ll = A * np.log(Pc) + (1.0 - A) * np.log1p(-Pc)
    ll = np.where(obs > 0, ll, 0.0) * obs
    loss = -2.0 * np.triu(ll, 1).sum()
    active = (obs > 0) & (P == Pc)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        dtheta = -2.0 * (A - P) * link.score_of(theta) * obs
    dtheta = np.where(active, dtheta, 0.0)
    return loss, dtheta


def loss_and_gradients(emb, net, link=DEFAULT_LINK, need_grad=True, backend=None):
    """Loss together with ``dL/dZ`` and (hyperbolic only) ``dL/dk``.

    Returns ``(loss, grad_Z, grad_k)``; ``grad_k`` is ``None`` for Euclidean
    embeddings and both gradients are ``None`` when ``need_grad`` is false.

    ``backend`` is ``"numpy"`` (the reference implementation), ``"compiled"``
    (a fused pair loop, only for the built-in links) or ``None`` to pick the
    compiled loop when it applies.
    """
    _check_dims(emb, net)
    if backend is None:
        backend = "compiled" if _compiled_ok(link) else "numpy"
    if backend == "compiled":
        return _compiled(emb, net, link, need_grad)
    if backend != "numpy":
        raise ValueError(f"unknown backend {backend!r}")
    A = net.adjacency
    obs = net.observed()
    Z = emb.Z
    if emb.is_hyperbolic:
        X = _minus_gram(Z)
        theta = _pair_acosh(X, Z) / np.sqrt(emb.k)
        np.fill_diagonal(theta, 0.0)
        loss, dtheta = _loss_parts(theta, A, obs, link)
        if not need_grad:
            return loss, None, None
        far = X > 1.0 + COINCIDENT
        with np.errstate(invalid="ignore", divide="ignore"):
            W = dtheta / (np.sqrt(emb.k) * np.sqrt((X - 1.0) * (X + 1.0)))
        W = np.where(far, W, 0.0)
        grad_Z = -(W @ Z) * minkowski_diag(Z.shape[1] - 1)
        grad_k = -float(np.sum(dtheta * theta)) / (4.0 * emb.k)
        return loss, grad_Z, grad_k
    theta = distance_matrix(emb)
    loss, dtheta = _loss_parts(theta, A, obs, link)
    if not need_grad:
        return loss, None, None
    far = theta > COINCIDENT
    with np.errstate(invalid="ignore", divide="ignore"):
        W = np.where(far, dtheta / theta, 0.0)
    grad_Z = W.sum(axis=1)[:, None] * Z - W @ Z
    return loss, grad_Z, None


def _compiled_ok(link):
    return _kernels.numba is not None and (link is LOGISTIC2 or link is EXPONENTIAL)


def _compiled(emb, net, link, need_grad):
    if not _compiled_ok(link):
        raise ValueError(f"no compiled kernel for link {link.name!r}")
    link_id = _kernels.LINK_IDS[link.name]
    Z = np.ascontiguousarray(emb.Z)
    obs = np.ascontiguousarray(net.observed())
    if emb.is_hyperbolic:
        loss, grad, gk, bad = _kernels.hyperbolic_kernel(
            Z, emb.k, net.adjacency, obs, link_id, need_grad, PROB_CLIP, COINCIDENT, ACOSH_SLACK
        )
        if bad:
            raise ManifoldError("-<z_i, z_j> < 1: points are off the hyperboloid")
        return (loss, grad, gk) if need_grad else (loss, None, None)
    loss, grad = _kernels.euclidean_kernel(Z, net.adjacency, obs, link_id, need_grad, PROB_CLIP, COINCIDENT)
    return (loss, grad, None) if need_grad else (loss, None, None)


def neg_log_likelihood(emb, net, link=DEFAULT_LINK):
    """``-sum_{i != j, observed} [A log P + (1 - A) log(1 - P)]``."""
    return loss_and_gradients(emb, net, link, need_grad=False)[0]


def log_likelihood(emb, net, link=DEFAULT_LINK):
    """Negated :func:`neg_log_likelihood` (same ordered-pair convention)."""
    return -neg_log_likelihood(emb, net, link)


def grad_Z(emb, net, link=DEFAULT_LINK):
    """Euclidean gradient of the loss in the ambient coordinates of ``Z``."""
    return loss_and_gradients(emb, net, link)[1]


def grad_K(emb, net, link=DEFAULT_LINK):
    """Derivative of the loss with respect to the curvature magnitude."""
    if not emb.is_hyperbolic:
        raise ValueError("grad_K is only defined for hyperbolic embeddings")
    return loss_and_gradients(emb, net, link)[2]
