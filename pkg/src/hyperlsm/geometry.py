"""Hyperboloid and Poincare-ball geometry.

Points of the hyperboloid model are stored as ``(d+1)``-vectors whose last
coordinate is the time-like one, so that ``x^T L x = -1`` with
``L = diag(1, ..., 1, -1)``. The curvature magnitude ``k`` only rescales
distances by ``1/sqrt(k)``; the point set itself does not depend on it.

All functions operate on the last axis and broadcast over leading axes, so
a single point and an ``(n, d+1)`` matrix of points are handled alike.
"""

import numpy as np

from .exceptions import DimensionError, DomainError, ManifoldError, TangentError

#: Slack allowed below 1 in ``-<x, y>`` before a pair is declared off-manifold.
ACOSH_SLACK = 1e-9
#: Tangency tolerance accepted by :func:`exp_map`.
TANGENT_TOL = 1e-8
#: Below this Minkowski norm :func:`exp_map` uses the first-order series.
SMALL_NORM = 1e-12


def minkowski_diag(d):
    """Diagonal of ``L`` for a ``d``-dimensional hyperboloid (length ``d+1``)."""
    diag = np.ones(d + 1)
    diag[-1] = -1.0
    return diag


def minkowski_form(d):
    """The ``(d+1) x (d+1)`` matrix ``diag(1, ..., 1, -1)``."""
    return np.diag(minkowski_diag(d))


def lorentz_inner(x, y):
    """Lorentzian inner product ``sum_{i<=d} x_i y_i - x_{d+1} y_{d+1}``.

    Parameters
    ----------
    x, y : array_like, shape (..., d+1)
        Vectors in ambient coordinates; ``d + 1 >= 3``.

    Returns
    -------
    float or ndarray
        Inner products along the last axis.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionError(f"length mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    if x.shape[-1] < 3:
        raise DimensionError("ambient dimension must be at least 3")
    out = np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]
    return out[()] if np.ndim(out) == 0 else out


def clamped_acosh(c, slack=ACOSH_SLACK):
    """``acosh`` of ``c`` clamped at 1; raises when ``c < 1 - slack``."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 1.0 - slack):
        worst = float(np.min(c))
        raise ManifoldError(f"-<x, y> = {worst!r} < 1: points are off the hyperboloid")
    return np.arccosh(np.maximum(c, 1.0))


def hyperboloid_distance(x, y, k=1.0):
    """Geodesic distance on the hyperboloid of curvature ``-k``.

    ``acosh(-<x, y>) / sqrt(k)``; the argument is clamped to 1 when round-off
    pushes it slightly below. For nearby points the equivalent
    ``2 asinh(|x - y|_L / 2)``, with ``|.|_L`` the Lorentzian norm of the
    difference, is used instead since ``acosh`` loses half the digits near 1.
    """
    _check_curvature(k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = -lorentz_inner(x, y)
    far = clamped_acosh(c)
    diff = x - y
    near = 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(lorentz_inner(diff, diff), 0.0)))
    out = np.where(c < 2.0, near, far) / np.sqrt(k)
    return out[()] if np.ndim(out) == 0 else out


def poincare_distance(x, y, k=1.0):
    """Distance in the Poincare ball of curvature ``-k``.

    Uses ``acosh(1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))) / sqrt(k)``, the form
    for which :func:`to_poincare` is an isometry.
    """
    _check_curvature(k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionError(f"length mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    sx = np.sum(x * x, axis=-1)
    sy = np.sum(y * y, axis=-1)
    if np.any(sx >= 1.0) or np.any(sy >= 1.0):
        raise DomainError("Poincare points must lie strictly inside the unit ball")
    diff = np.sum((x - y) ** 2, axis=-1)
    arg = 2.0 * diff / ((1.0 - sx) * (1.0 - sy))
    # acosh(1 + a) written via log1p keeps precision for nearby points
    out = np.log1p(arg + np.sqrt(arg * (arg + 2.0))) / np.sqrt(k)
    return out[()] if np.ndim(out) == 0 else out


def to_poincare(x):
    """Map hyperboloid points to the Poincare ball: ``x_i / (1 + x_{d+1})``."""
    x = np.asarray(x, dtype=float)
    return x[..., :-1] / (1.0 + x[..., -1:])


def to_hyperboloid(p):
    """Inverse of :func:`to_poincare`: ``(2p, 1 + |p|^2) / (1 - |p|^2)``."""
    p = np.asarray(p, dtype=float)
    s = np.sum(p * p, axis=-1, keepdims=True)
    if np.any(s >= 1.0):
        raise DomainError("Poincare points must lie strictly inside the unit ball")
    return np.concatenate([2.0 * p, 1.0 + s], axis=-1) / (1.0 - s)


def lift_to_hyperboloid(w):
    """Keep the spatial coordinates and recompute the time coordinate.

    The result ``(w_1, ..., w_d, sqrt(1 + sum w_i^2))`` is on the upper sheet
    regardless of the input's last coordinate.
    """
    w = np.array(w, dtype=float, copy=True)
    w[..., -1] = np.sqrt(1.0 + np.sum(w[..., :-1] ** 2, axis=-1))
    return w


def tangent_project(z, g):
    """Project ambient vectors onto the tangent space at ``z``: ``g + <g, z> z``."""
    z = np.asarray(z, dtype=float)
    g = np.asarray(g, dtype=float)
    if z.shape[-1] != g.shape[-1]:
        raise DimensionError(f"length mismatch: {z.shape[-1]} vs {g.shape[-1]}")
    return g + np.expand_dims(lorentz_inner(g, z), -1) * z


def exp_map(z, v):
    """Exponential map at ``z`` applied to the tangent vector ``v``.

    ``cosh(m) z + sinh(m)/m v`` with ``m = sqrt(<v, v>)``. Rows where ``m`` is
    below :data:`SMALL_NORM` fall back to ``z + v``. The time coordinate of
    the result is recomputed with :func:`lift_to_hyperboloid`; without this,
    round-off in ``<z, z>`` is amplified by repeated steps.

    Raises
    ------
    TangentError
        If ``v`` is not tangent at ``z`` (``|<v, z>|`` above tolerance, or
        ``<v, v>`` clearly negative).
    """
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    if z.shape != v.shape:
        raise DimensionError(f"shape mismatch: {z.shape} vs {v.shape}")
    scale = np.maximum(1.0, np.linalg.norm(v, axis=-1) * np.linalg.norm(z, axis=-1))
    if np.any(np.abs(lorentz_inner(v, z)) > TANGENT_TOL * scale):
        raise TangentError("vector is not tangent to the hyperboloid at the base point")
    vv = lorentz_inner(v, v)
    if np.any(vv < -TANGENT_TOL * scale**2):
        raise TangentError("tangent vector has negative Minkowski norm")
    m = np.sqrt(np.maximum(vv, 0.0))
    m_ = np.expand_dims(m, -1)
    small = m_ < SMALL_NORM
    safe = np.where(small, 1.0, m_)
    out = np.where(small, z + v, np.cosh(m_) * z + (np.sinh(safe) / safe) * v)
    return lift_to_hyperboloid(out)


def pair_rotation(i, j, theta, d):
    """Isometry acting on the coordinate pair ``(i, j)`` (0-based, ``i < j``).

    A circular rotation when both coordinates are spatial, a boost when ``j``
    is the time coordinate ``d``.
    """
    if not 0 <= i < j <= d:
        raise ValueError(f"invalid coordinate pair ({i}, {j}) for d={d}")
    q = np.eye(d + 1)
    if j == d:
        c, s = np.cosh(theta), np.sinh(theta)
        q[i, i] = q[j, j] = c
        q[i, j] = q[j, i] = s
    else:
        c, s = np.cos(theta), np.sin(theta)
        q[i, i] = q[j, j] = c
        q[i, j] = -s
        q[j, i] = s
    return q


# kind -> coordinate pair, for d = 2 these are the three textbook generators
_KIND_PAIRS = {1: (1, -1), 2: (0, -1), 3: (0, 1)}


def hyperbolic_rotation(kind, theta, d=2):
    """One of the three basic hyperboloid isometries.

    ``kind=1`` boosts coordinates 2 and ``d+1``, ``kind=2`` boosts 1 and
    ``d+1``, ``kind=3`` rotates coordinates 1 and 2. For ``d > 2`` the same
    generators are embedded in the larger space; use :func:`pair_rotation`
    for the other coordinate pairs.

    Points are column vectors, so a point ``x`` maps to ``Q @ x`` and a row
    matrix ``Z`` maps to ``Z @ Q.T``.
    """
    if kind not in _KIND_PAIRS:
        raise ValueError(f"kind must be 1, 2 or 3, got {kind!r}")
    if d < 2:
        raise DimensionError("hyperbolic rotations need d >= 2")
    i, j = _KIND_PAIRS[kind]
    return pair_rotation(i, j % (d + 1), theta, d)


def random_isometry(d, rng, scale=1.0):
    """Compose generators over every coordinate pair with random angles."""
    q = np.eye(d + 1)
    for i in range(d + 1):
        for j in range(i + 1, d + 1):
            q = pair_rotation(i, j, rng.uniform(-scale, scale) * (np.pi if j < d else 1.0), d) @ q
    return q


def equilateral_midpoint_distance(k, side=1.0):
    """Distance from a vertex of an equilateral triangle to the opposite midpoint.

    Solves ``cosh(sqrt(k) s) = cosh(sqrt(k) s / 2) cosh(sqrt(k) CD)`` for
    ``CD``. Tends to the Euclidean median ``sqrt(3)/2 * s`` as ``k -> 0``.
    """
    if k <= 0 or side <= 0:
        raise ValueError("k and side must be positive")
    a = np.sqrt(k) * side
    # cosh(a)/cosh(a/2) - 1, rewritten to avoid cancellation for small a
    y = 2.0 * np.sinh(0.75 * a) * np.sinh(0.25 * a) / np.cosh(0.5 * a)
    return float(np.log1p(y + np.sqrt(y * (y + 2.0))) / np.sqrt(k))


def _check_curvature(k):
    if not np.all(np.asarray(k) > 0):
        raise ValueError(f"curvature magnitude must be positive, got {k!r}")
