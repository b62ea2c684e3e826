"""Compiled pair loops for the built-in link functions.

Each kernel visits every unordered pair once, in row-major order, and
returns the loss and gradients of :func:`hyperlsm.model.loss_and_gradients`.
The numpy implementation in that module is the reference; these agree with
it to round-off.
"""

import math

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

LINK_IDS = {"logistic2": 0, "exp": 1}


def _bernoulli_loglik(a, pc):
    if a == 1.0:
        return math.log(pc)
    if a == 0.0:
        return math.log1p(-pc)
    return a * math.log(pc) + (1.0 - a) * math.log1p(-pc)


def _hyperbolic(Z, k, A, obs, link_id, need_grad, prob_clip, coincident, slack):
    n, D = Z.shape
    sk = math.sqrt(k)
    grad = np.zeros((n, D))
    loss = 0.0
    gk = 0.0
    bad = 0
    for i in range(n):
        for j in range(i + 1, n):
            w = obs[i, j]
            if w == 0.0:
                continue
            x = Z[i, D - 1] * Z[j, D - 1]
            for s in range(D - 1):
                x -= Z[i, s] * Z[j, s]
            tol = slack * max(1.0, Z[i, D - 1] * Z[j, D - 1])
            if x < 1.0 - tol:
                bad = 1
                continue
            xc = max(x, 1.0)
            theta = math.acosh(xc) / sk
            u = math.exp(-theta)
            if link_id == 0:
                p = 2.0 * u / (1.0 + u)
            else:
                p = u
            pc = min(max(p, prob_clip), 1.0 - prob_clip)
            a = A[i, j]
            loss -= 2.0 * w * _bernoulli_loglik(a, pc)
            if not need_grad or pc != p or x <= 1.0 + coincident:
                continue
            dtheta = -2.0 * (a - p) * w / (u - 1.0 if theta > 0.5 else math.expm1(-theta))
            gk += dtheta * theta
            c = dtheta / (sk * math.sqrt((x - 1.0) * (x + 1.0)))
            for s in range(D - 1):
                grad[i, s] -= c * Z[j, s]
                grad[j, s] -= c * Z[i, s]
            grad[i, D - 1] += c * Z[j, D - 1]
            grad[j, D - 1] += c * Z[i, D - 1]
    return loss, grad, -gk / (2.0 * k), bad


def _euclidean(Z, A, obs, link_id, need_grad, prob_clip, coincident):
    n, D = Z.shape
    grad = np.zeros((n, D))
    loss = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            w = obs[i, j]
            if w == 0.0:
                continue
            sq = 0.0
            for s in range(D):
                diff = Z[i, s] - Z[j, s]
                sq += diff * diff
            theta = math.sqrt(sq)
            u = math.exp(-theta)
            if link_id == 0:
                p = 2.0 * u / (1.0 + u)
            else:
                p = u
            pc = min(max(p, prob_clip), 1.0 - prob_clip)
            a = A[i, j]
            loss -= 2.0 * w * _bernoulli_loglik(a, pc)
            if not need_grad or pc != p or theta <= coincident:
                continue
            dtheta = -2.0 * (a - p) * w / (u - 1.0 if theta > 0.5 else math.expm1(-theta))
            c = dtheta / theta
            for s in range(D):
                diff = c * (Z[i, s] - Z[j, s])
                grad[i, s] += diff
                grad[j, s] -= diff
    return loss, grad


if numba is not None:
    _bernoulli_loglik = numba.njit(inline="always")(_bernoulli_loglik)
    hyperbolic_kernel = numba.njit(cache=True, nogil=True)(_hyperbolic)
    euclidean_kernel = numba.njit(cache=True, nogil=True)(_euclidean)
else:  # pragma: no cover
    hyperbolic_kernel = euclidean_kernel = None


def available(link):
    return numba is not None and link.name in LINK_IDS
