"""Simulation of latent positions and networks, and descriptive statistics.

Random streams use numpy's Philox counter-based generator so that a seed
reproduces the same draws on every platform.
"""

from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.stats import skew

from .model import DEFAULT_LINK, EUCLIDEAN, HYPERBOLIC, LatentEmbedding, LinkFunction, Network, probability_matrix


def make_rng(seed, *keys):
    """Philox generator keyed by ``seed`` and optional sub-stream ``keys``."""
    if isinstance(seed, np.random.Generator):
        return seed
    entropy = [int(seed)] + [int(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass
class SimConfig:
    n: int = 500
    d: int = 2
    k: Optional[float] = 1.0  # None or 0 selects the Euclidean disk
    radius: float = 3.0
    link: LinkFunction = DEFAULT_LINK
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")

    @property
    def geometry(self):
        return EUCLIDEAN if not self.k else HYPERBOLIC


@dataclass
class GraphStats:
    edge_density: float
    transitivity: float
    betweenness_centrality: float
    average_path_length: float
    diameter: float


def hyperbolic_radius(u, k, radius):
    """Inverse radial CDF of the uniform law on a hyperbolic disk.

    The area element on the curvature ``-k`` plane is proportional to
    ``sinh(sqrt(k) r) dr dtheta``, so ``F(r) = (cosh(sqrt(k) r) - 1) /
    (cosh(sqrt(k) R) - 1)``.
    """
    sk = np.sqrt(k)
    return np.arccosh(1.0 + np.asarray(u) * (np.cosh(sk * radius) - 1.0)) / sk


def radial_cdf(r, k, radius):
    sk = np.sqrt(k)
    return (np.cosh(sk * np.asarray(r)) - 1.0) / (np.cosh(sk * radius) - 1.0)


def sample_uniform_disk(cfg, rng=None):
    """Draw ``cfg.n`` i.i.d. points uniform on a disk of radius ``cfg.radius``.

    Hyperbolic points (``d = 2`` only) are returned on the hyperboloid; the
    apex is the disk centre. Euclidean points use ``r = R sqrt(u)``.
    """
    rng = make_rng(cfg.seed) if rng is None else rng
    u = rng.random(cfg.n)
    angle = rng.uniform(0.0, 2.0 * np.pi, cfg.n)
    if cfg.geometry == EUCLIDEAN:
        if cfg.d != 2:
            pts = rng.standard_normal((cfg.n, cfg.d))
            pts /= np.linalg.norm(pts, axis=1, keepdims=True)
            r = cfg.radius * u ** (1.0 / cfg.d)
            return LatentEmbedding(pts * r[:, None], None, EUCLIDEAN)
        r = cfg.radius * np.sqrt(u)
        return LatentEmbedding(np.column_stack([r * np.cos(angle), r * np.sin(angle)]), None, EUCLIDEAN)
    if cfg.d != 2:
        raise NotImplementedError("uniform hyperbolic sampling is implemented for d = 2 only")
    k = float(cfg.k)
    s = np.sqrt(k) * hyperbolic_radius(u, k, cfg.radius)
    sh = np.sinh(s)
    Z = np.column_stack([sh * np.cos(angle), sh * np.sin(angle), np.cosh(s)])
    return LatentEmbedding(Z, k, HYPERBOLIC)


def generate_network(emb, link=DEFAULT_LINK, seed=0, P=None):
    """Independent Bernoulli edges on unordered pairs, mirrored to symmetry."""
    rng = make_rng(seed)
    if P is None:
        P = probability_matrix(emb, link)
    return network_from_probabilities(P, rng)


def network_from_probabilities(P, rng):
    n = P.shape[0]
    iu = np.triu_indices(n, 1)
    draws = rng.random(iu[0].size) < P[iu]
    A = np.zeros((n, n), dtype=np.int8)
    A[iu] = draws
    A += A.T
    return Network(A)


def simulate(cfg):
    """Latent positions and a network drawn from them, both seeded by ``cfg.seed``."""
    emb = sample_uniform_disk(cfg, make_rng(cfg.seed, 0))
    net = generate_network(emb, cfg.link, make_rng(cfg.seed, 1))
    return emb, net


def transitivity(A):
    """Global clustering: ``3 * triangles / connected triples``."""
    A = np.asarray(A, dtype=float)
    deg = A.sum(axis=1)
    triples = float(np.sum(deg * (deg - 1.0)))
    if triples == 0:
        return 0.0
    closed = float(np.einsum("ij,ji->", A @ A, A))  # trace(A^3) = 6 * triangles
    return closed / triples


def largest_component(A):
    _, labels = connected_components(sparse.csr_matrix(A), directed=False)
    counts = np.bincount(labels)
    keep = np.flatnonzero(labels == np.argmax(counts))
    return A[np.ix_(keep, keep)]


def path_length_stats(A):
    """Average shortest-path length and diameter of the largest component."""
    sub = largest_component(np.asarray(A))
    m = sub.shape[0]
    if m < 2:
        return 0.0, 0.0
    dist = shortest_path(sparse.csr_matrix(sub), method="D", directed=False, unweighted=True)
    iu = np.triu_indices(m, 1)
    return float(dist[iu].mean()), float(dist[iu].max())


def mean_betweenness(A):
    """Mean node betweenness normalised by ``(n-1)(n-2)/2``."""
    n = A.shape[0]
    if n < 3:
        return 0.0
    g = nx.from_numpy_array(np.asarray(A))
    return float(np.mean(list(nx.betweenness_centrality(g, normalized=True).values())))


def graph_stats(net):
    A = net.adjacency if isinstance(net, Network) else np.asarray(net, dtype=float)
    n = A.shape[0]
    if n < 2:
        raise ValueError("graph_stats needs n >= 2")
    apl, diam = path_length_stats(A)
    return GraphStats(
        edge_density=float(A.sum() / (n * (n - 1))),
        transitivity=transitivity(A),
        betweenness_centrality=mean_betweenness(A),
        average_path_length=apl,
        diameter=diam,
    )


def degree_distribution(net):
    """``{degree: count}`` for every degree that occurs."""
    deg = net.adjacency.sum(axis=1).astype(int)
    values, counts = np.unique(deg, return_counts=True)
    return dict(zip(values.tolist(), counts.tolist()))


def degree_skewness(net):
    return float(skew(net.adjacency.sum(axis=1)))
