"""Spectral initialization and the identifiability canonical form.

Pipeline: singular value thresholding of the adjacency matrix gives a
probability estimate, the inverse link turns it into distances, an optional
higher-dimensional Euclidean fit refines those distances, and each candidate
curvature is tried with a short frozen-curvature fit.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DegenerateSpectrumError, ManifoldError
from .geometry import lift_to_hyperboloid, minkowski_diag
from .model import DEFAULT_LINK, EUCLIDEAN, HYPERBOLIC, LatentEmbedding, distance_matrix
from .optim import FitConfig, fit, fit_euclidean

log = logging.getLogger(__name__)


class NonIdentifiableWarning(UserWarning):
    """Repeated eigenvalues leave the canonical rotation undetermined."""


@dataclass
class InitConfig:
    """Initialization settings.

    ``tau=None`` means ``2.01 * sqrt(n * density)``. ``prefit_dim=None``
    disables the Euclidean refinement. ``candidate_iters`` and
    ``prefit_iters`` cap the inner fits.
    """

    tau: Optional[float] = None
    k_candidates: Sequence[float] = field(default_factory=lambda: (0.1, 1.0, 10.0))
    prefit_dim: Optional[int] = 20
    clip_eps: float = 1e-6
    candidate_iters: int = 200
    prefit_iters: int = 200

    def __post_init__(self):
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if not self.k_candidates or min(self.k_candidates) <= 0:
            raise ValueError("k_candidates must be a non-empty list of positive values")
        if not 0 < self.clip_eps < 0.5:
            raise ValueError("clip_eps must lie in (0, 0.5)")

    def threshold(self, net):
        if self.tau is not None:
            return self.tau
        n = net.n
        obs = net.observed()
        density = (net.adjacency * obs).sum() / max(obs.sum(), 1.0)
        return 2.01 * np.sqrt(n * max(density, 1.0 / n**2))


def usvt(net, tau, link=DEFAULT_LINK, clip_eps=1e-6):
    """Distance estimate from singular value thresholding of the adjacency.

    Singular values of a symmetric matrix are the absolute eigenvalues, so
    the truncated SVD is computed with a symmetric eigensolver. Unobserved
    entries are treated as non-edges.
    """
    A = net.adjacency if net.mask is None else net.adjacency * net.mask
    evals, evecs = np.linalg.eigh(A)
    keep = np.abs(evals) >= tau
    P0 = (evecs[:, keep] * evals[keep]) @ evecs[:, keep].T
    P0 = 0.5 * (P0 + P0.T)
    P0 = np.clip(P0, clip_eps, 1.0 - clip_eps)
    theta = link.inverse(P0)
    np.fill_diagonal(theta, 0.0)
    return theta


def _fix_signs(cols, last_by_mean):
    """Largest-magnitude entry of each column positive; optionally the last by mean."""
    idx = np.argmax(np.abs(cols), axis=0)
    signs = np.sign(cols[idx, np.arange(cols.shape[1])])
    if last_by_mean:
        signs[-1] = np.sign(cols[:, -1].sum())
    signs[signs == 0] = 1.0
    return cols * signs


def _assemble(evals, evecs, d, tol):
    """Build ``U |S|^{1/2} L`` from the ``d`` leading and the most negative eigenpair."""
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    neg = evals[-1]
    if neg >= -tol:
        raise DegenerateSpectrumError("no negative eigenvalue: matrix is not of hyperboloid type")
    top = evals[:d]
    if top.size < d or np.any(top < -tol):
        raise DegenerateSpectrumError(f"fewer than d={d} non-negative eigenvalues")
    # eigenvalues within round-off of zero carry no geometry
    lam = np.concatenate([np.where(top > tol, top, 0.0), [neg]])
    vecs = np.column_stack([evecs[:, :d], evecs[:, -1]])
    Z = vecs * np.sqrt(np.abs(lam)) * minkowski_diag(d)
    return _fix_signs(Z, last_by_mean=True), lam


def theta_to_embedding(theta0, k, d):
    """Hyperboloid positions whose distances approximate ``theta0`` at curvature ``-k``.

    Eigendecomposes ``M = -cosh(sqrt(k) theta0)`` (the target of ``Z L Z^T``),
    keeps the ``d`` largest eigenvalues and the most negative one, and lifts
    the rows onto the hyperboloid.
    """
    theta0 = np.asarray(theta0, dtype=float)
    M = -np.cosh(np.sqrt(k) * theta0)
    np.fill_diagonal(M, -1.0)
    evals, evecs = np.linalg.eigh(M)
    tol = 1e-10 * max(1.0, np.abs(evals).max())
    Z, _ = _assemble(evals, evecs, d, tol)
    return LatentEmbedding(lift_to_hyperboloid(Z), k, HYPERBOLIC)


def canonicalize(emb):
    """Rotate ``Z`` so that ``Z^T Z`` is diagonal.

    ``Z L Z^T`` is diagonalised through a QR factorization of ``Z`` and a
    small ``(d+1) x (d+1)`` eigenproblem, so no ``n x n`` matrix is formed.
    Distances are unchanged.
    """
    if not emb.is_hyperbolic:
        raise ValueError("canonicalize expects a hyperbolic embedding")
    Z = emb.Z
    d = Z.shape[1] - 1
    Q, R = np.linalg.qr(Z)
    small = (R * minkowski_diag(d)) @ R.T
    evals, V = np.linalg.eigh(0.5 * (small + small.T))
    scale = max(1.0, np.abs(evals).max())
    gaps = np.abs(np.diff(np.sort(evals)))
    if np.any(gaps <= 1e-10 * scale):
        warnings.warn("repeated eigenvalues: canonical form is not unique", NonIdentifiableWarning, stacklevel=2)
    Zc, _ = _assemble(evals, Q @ V, d, 1e-12 * scale)
    return LatentEmbedding(lift_to_hyperboloid(Zc), emb.k, HYPERBOLIC)


def classical_mds(theta, dim):
    """Coordinates from the top ``dim`` eigenpairs of the double-centred Gram."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (theta**2) @ J
    evals, evecs = np.linalg.eigh(0.5 * (B + B.T))
    order = np.argsort(evals)[::-1][:dim]
    X = evecs[:, order] * np.sqrt(np.maximum(evals[order], 0.0))
    if X.shape[1] < dim:
        X = np.pad(X, ((0, 0), (0, dim - X.shape[1])))
    return X


def initial_distances(net, cfg=None, fit_cfg=None, link=DEFAULT_LINK):
    """Distance estimate used to seed both geometries.

    Thresholded SVD, optionally refined by a ``cfg.prefit_dim``-dimensional
    Euclidean fit started from classical MDS.
    """
    cfg = cfg or InitConfig()
    fit_cfg = fit_cfg or FitConfig()
    theta0 = usvt(net, cfg.threshold(net), link, cfg.clip_eps)
    if cfg.prefit_dim:
        dim = min(cfg.prefit_dim, max(net.n - 1, 1))
        X0 = classical_mds(theta0, dim)
        res = fit_euclidean(net, LatentEmbedding(X0, None, EUCLIDEAN), fit_cfg.replace(max_iters=cfg.prefit_iters), link)
        theta0 = distance_matrix(res.embedding)
    return theta0


def initialize(net, d, cfg=None, fit_cfg=None, link=DEFAULT_LINK, theta0=None):
    """Starting point for the joint fit, chosen over candidate curvatures.

    Each candidate ``k`` seeds positions with :func:`theta_to_embedding` and
    runs a frozen-curvature fit for ``cfg.candidate_iters`` iterations; the
    candidate with the lowest loss wins (ties go to the earlier candidate).
    Returns the fitted candidate embedding.
    """
    cfg = cfg or InitConfig()
    fit_cfg = fit_cfg or FitConfig()
    if theta0 is None:
        theta0 = initial_distances(net, cfg, fit_cfg, link)
    inner = fit_cfg.replace(freeze_K=True, max_iters=cfg.candidate_iters)
    best, best_loss = None, np.inf
    for k in cfg.k_candidates:
        try:
            res = fit(net, theta_to_embedding(theta0, k, d), inner, link)
        except (DegenerateSpectrumError, ManifoldError) as exc:
            log.warning("candidate k=%g skipped: %s", k, exc)
            continue
        log.debug("candidate k=%g loss=%.6g", k, res.loss)
        if res.loss < best_loss:
            best, best_loss = res.embedding, res.loss
    if best is None:
        raise DegenerateSpectrumError("no candidate curvature produced a valid embedding")
    return best


def initialize_euclidean(net, d, cfg=None, fit_cfg=None, link=DEFAULT_LINK, theta0=None):
    """Euclidean starting positions: classical MDS of the initial distances."""
    if theta0 is None:
        theta0 = initial_distances(net, cfg, fit_cfg, link)
    return LatentEmbedding(classical_mds(theta0, d), None, EUCLIDEAN)
