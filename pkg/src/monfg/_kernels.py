"""Compiled inner loops for simplex-constrained scalarised-return maximization.

The public optimizer contract lives in :mod:`monfg.optim`; these kernels are
its fast path for the frequent special case "utility of a linear mixture of
payoff vectors". Utility variants are passed as integer codes so the whole
ascent stays in nopython mode:

    0 = linear, 1 = polysum, 2 = product

The threshold variant is handled outside (vertex plus dense grid, no ascent).
All kernels are pure functions of their arguments; randomness (the multi-start
points) is generated by the caller, which keeps determinism in one place.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import LinearUtility, PolySumUtility, ProductUtility, UtilitySpec
from .errors import NonDifferentiable

LINEAR, POLYSUM, PRODUCT = 0, 1, 2


def pack_utility(u: UtilitySpec, d: int) -> tuple[int, np.ndarray, np.ndarray, bool]:
    """Encode a differentiable utility spec as kernel arguments."""
    if isinstance(u, LinearUtility):
        return LINEAR, np.asarray(u.weights, dtype=np.float64), np.ones(d, dtype=np.int64), u.nonneg_guard
    if isinstance(u, PolySumUtility):
        return (
            POLYSUM,
            np.asarray(u.weights, dtype=np.float64),
            np.asarray(u.exponents, dtype=np.int64),
            u.nonneg_guard,
        )
    if isinstance(u, ProductUtility):
        return PRODUCT, np.ones(d, dtype=np.float64), np.ones(d, dtype=np.int64), u.nonneg_guard
    raise NonDifferentiable(f"no kernel encoding for utility {u!r}")


@njit(cache=True, nogil=True)
def _uval(p, code, w, e, guard):
    d = p.shape[0]
    if guard:
        for j in range(d):
            if p[j] < 0.0:
                return 0.0
    if code == 0:
        s = 0.0
        for j in range(d):
            s += w[j] * p[j]
        return s
    elif code == 1:
        s = 0.0
        for j in range(d):
            s += w[j] * p[j] ** e[j]
        return s
    else:
        s = 1.0
        for j in range(d):
            s *= p[j]
        return s


@njit(cache=True, nogil=True)
def _ugrad(p, code, w, e, guard, out):
    d = p.shape[0]
    if guard:
        for j in range(d):
            if p[j] < 0.0:
                for l in range(d):
                    out[l] = 0.0
                return
    if code == 0:
        for j in range(d):
            out[j] = w[j]
    elif code == 1:
        for j in range(d):
            out[j] = w[j] * e[j] * p[j] ** (e[j] - 1)
    else:
        for j in range(d):
            g = 1.0
            for l in range(d):
                if l != j:
                    g *= p[l]
            out[j] = g


@njit(cache=True, nogil=True)
def _project_simplex(x, out):
    """Euclidean projection onto the probability simplex (sort and shift)."""
    k = x.shape[0]
    u = np.sort(x)[::-1]
    css = 0.0
    theta = 0.0
    for j in range(k):
        css += u[j]
        t = (css - 1.0) / (j + 1.0)
        if u[j] - t > 0.0:
            theta = t
    for j in range(k):
        v = x[j] - theta
        out[j] = v if v > 0.0 else 0.0


@njit(cache=True, nogil=True)
def mixture_ascent(V, code, w, e, guard, starts, step_init, max_iters, eps_opt):
    """Maximize u(pi @ V) over the simplex: vertices, then projected-gradient
    ascents with backtracking step halving from each start.

    Later candidates win exact value-ties (ascent results take precedence over
    vertex enumeration), so constant objectives yield a seeded interior point
    instead of a forced corner. Evaluation order is fixed, so the result is
    deterministic for given starts.
    """
    k = V.shape[0]
    d = V.shape[1]
    best = np.zeros(k)
    best_val = -np.inf
    p = np.zeros(d)
    for a in range(k):
        for j in range(d):
            p[j] = V[a, j]
        val = _uval(p, code, w, e, guard)
        if val >= best_val:
            best_val = val
            for j in range(k):
                best[j] = 0.0
            best[a] = 1.0

    gu = np.zeros(d)
    g = np.zeros(k)
    x = np.zeros(k)
    y = np.zeros(k)
    trial = np.zeros(k)
    for si in range(starts.shape[0]):
        for j in range(k):
            x[j] = starts[si, j]
        for j in range(d):
            acc = 0.0
            for a in range(k):
                acc += x[a] * V[a, j]
            p[j] = acc
        fx = _uval(p, code, w, e, guard)
        step = step_init
        for _ in range(max_iters):
            _ugrad(p, code, w, e, guard, gu)
            for a in range(k):
                acc = 0.0
                for j in range(d):
                    acc += V[a, j] * gu[j]
                g[a] = acc
            accepted = False
            s = step
            fy = fx
            for _ in range(40):
                for a in range(k):
                    trial[a] = x[a] + s * g[a]
                _project_simplex(trial, y)
                for j in range(d):
                    acc = 0.0
                    for a in range(k):
                        acc += y[a] * V[a, j]
                    p[j] = acc
                fy = _uval(p, code, w, e, guard)
                if fy > fx:
                    accepted = True
                    break
                s *= 0.5
            if not accepted:
                # Restore p to the current iterate before leaving the loop.
                for j in range(d):
                    acc = 0.0
                    for a in range(k):
                        acc += x[a] * V[a, j]
                    p[j] = acc
                break
            improvement = fy - fx
            for a in range(k):
                x[a] = y[a]
            fx = fy
            step = s * 2.0
            if improvement < eps_opt:
                break
        if fx >= best_val:
            best_val = fx
            for a in range(k):
                best[a] = x[a]
    return best, best_val


@njit(cache=True, nogil=True)
def _product_value(pis, Q, m, active, code, w, e, guard, p):
    d = Q.shape[2]
    for j in range(d):
        p[j] = 0.0
    for s in range(Q.shape[0]):
        if active[s]:
            for a in range(Q.shape[1]):
                pa = pis[s, a]
                if pa != 0.0:
                    for j in range(d):
                        p[j] += m[s] * pa * Q[s, a, j]
    return _uval(p, code, w, e, guard)


@njit(cache=True, nogil=True)
def product_simplex_ascent(
    Q, m, code, w, e, guard, starts, step_init, max_iters, eps_opt, enumerate_cap
):
    """Maximize u(sum_s m_s (pi_s @ Q_s)) jointly over one simplex per signal.

    Signals with zero marginal are skipped. Pure joint assignments are
    enumerated as vertices when their count does not exceed ``enumerate_cap``;
    projected-gradient ascents (blockwise simplex projection) run from every
    start either way.
    """
    S = Q.shape[0]
    k = Q.shape[1]
    d = Q.shape[2]
    active = np.zeros(S, dtype=np.bool_)
    n_active = 0
    for s in range(S):
        if m[s] > 0.0:
            active[s] = True
            n_active += 1

    best = np.zeros((S, k))
    for s in range(S):
        for a in range(k):
            best[s, a] = 1.0 / k
    best_val = -np.inf
    p = np.zeros(d)

    combos = 1
    for _ in range(n_active):
        combos *= k
        if combos > enumerate_cap:
            break
    if combos <= enumerate_cap and n_active > 0:
        assign = np.zeros(n_active, dtype=np.int64)
        cand = np.zeros((S, k))
        done = False
        while not done:
            for s in range(S):
                for a in range(k):
                    cand[s, a] = 0.0 if active[s] else 1.0 / k
            idx = 0
            for s in range(S):
                if active[s]:
                    cand[s, assign[idx]] = 1.0
                    idx += 1
            val = _product_value(cand, Q, m, active, code, w, e, guard, p)
            if val >= best_val:
                best_val = val
                for s in range(S):
                    for a in range(k):
                        best[s, a] = cand[s, a]
            pos = n_active - 1
            while pos >= 0:
                assign[pos] += 1
                if assign[pos] < k:
                    break
                assign[pos] = 0
                pos -= 1
            if pos < 0:
                done = True

    gu = np.zeros(d)
    grad = np.zeros((S, k))
    x = np.zeros((S, k))
    y = np.zeros((S, k))
    trial = np.zeros(k)
    row = np.zeros(k)
    for si in range(starts.shape[0]):
        for s in range(S):
            for a in range(k):
                x[s, a] = starts[si, s, a]
        fx = _product_value(x, Q, m, active, code, w, e, guard, p)
        step = step_init
        for _ in range(max_iters):
            _ugrad(p, code, w, e, guard, gu)
            for s in range(S):
                for a in range(k):
                    if active[s]:
                        acc = 0.0
                        for j in range(d):
                            acc += Q[s, a, j] * gu[j]
                        grad[s, a] = m[s] * acc
                    else:
                        grad[s, a] = 0.0
            accepted = False
            st = step
            fy = fx
            for _ in range(40):
                for s in range(S):
                    for a in range(k):
                        trial[a] = x[s, a] + st * grad[s, a]
                    _project_simplex(trial, row)
                    for a in range(k):
                        y[s, a] = row[a]
                fy = _product_value(y, Q, m, active, code, w, e, guard, p)
                if fy > fx:
                    accepted = True
                    break
                st *= 0.5
            if not accepted:
                _product_value(x, Q, m, active, code, w, e, guard, p)
                break
            improvement = fy - fx
            for s in range(S):
                for a in range(k):
                    x[s, a] = y[s, a]
            fx = fy
            step = st * 2.0
            if improvement < eps_opt:
                break
        if fx >= best_val:
            best_val = fx
            for s in range(S):
                for a in range(k):
                    best[s, a] = x[s, a]
    return best, best_val


def warmup() -> None:
    """Trigger JIT compilation of every kernel with tiny inputs."""
    V = np.array([[1.0, 0.0], [0.0, 1.0]])
    starts = np.full((1, 2), 0.5)
    w = np.ones(2)
    e = np.ones(2, dtype=np.int64)
    for code in (LINEAR, POLYSUM, PRODUCT):
        mixture_ascent(V, code, w, e, True, starts, 0.1, 5, 1e-7)
    Q = np.zeros((2, 2, 2))
    Q[:, :, 0] = 1.0
    m = np.array([0.5, 0.5])
    pstarts = np.full((1, 2, 2), 0.5)
    product_simplex_ascent(Q, m, PRODUCT, w, e, True, pstarts, 0.1, 5, 1e-7, 27)
