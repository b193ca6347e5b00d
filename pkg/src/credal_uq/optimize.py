"""Solvers over the mixture-weight simplex of a credal set's generators.

Two problems show up when evaluating measures on the convex hull rather than
on the generators:

* the smallest achievable largest-class probability, a linear program used by
  the upper aleatoric endpoint;
* the largest achievable Shannon entropy, a concave maximization used by the
  entropy baselines.

Both return a :class:`SolveReport` carrying a certified bound on the distance
to the true optimum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.optimize import linprog, nnls

from .simplex import CredalSet

LP_TOLERANCE = 1e-9
ENTROPY_TOLERANCE = 1e-7
MAX_ITERATIONS = 10_000

_INV_LN2 = 1.0 / math.log(2.0)
_TINY = 1e-300
_VANISH = 1e-12
_WEIGHT_FLOOR = 1e-15


class SolverError(RuntimeError):
    pass


class SolverWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a weight-simplex solve.

    ``weights`` is the optimizing mixture over generators, ``certified_gap``
    an upper bound on ``|optimum - true optimum|`` and ``converged`` is False
    only when the iteration cap was hit before the gap tolerance.
    """

    optimum: float
    weights: np.ndarray
    iterations: int
    certified_gap: float
    converged: bool = True


def _clean_weights(w: np.ndarray) -> np.ndarray:
    w = np.clip(np.asarray(w, dtype=float), 0.0, None)
    s = w.sum()
    if s <= 0:
        raise SolverError("solver returned an all-zero weight vector")
    return w / s


def minimax_max_coordinate(cs: CredalSet, tol: float = LP_TOLERANCE) -> SolveReport:
    """Minimize ``max_y sum_j w_j p_j(y)`` over mixture weights ``w``.

    Solved as the linear program ``min t`` s.t. ``P^T w <= t``, ``sum w = 1``,
    ``w >= 0`` with the HiGHS dual simplex. The reported optimum is evaluated
    at the returned (feasible) weights, so it never undershoots the true
    minimum; the dual multipliers give the matching lower bound.
    """
    P = cs.probs
    m, k = P.shape
    if m == 1:
        return SolveReport(float(P[0].max()), np.ones(1), 0, 0.0)
    if k == 2:
        return _binary_minimax(P)

    c = np.zeros(m + 1)
    c[-1] = 1.0
    a_ub = np.hstack([P.T, -np.ones((k, 1))])
    b_ub = np.zeros(k)
    a_eq = np.zeros((1, m + 1))
    a_eq[0, :m] = 1.0
    bounds = [(0.0, None)] * m + [(None, None)]
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=bounds,
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status != 0:
        raise SolverError(f"LP solve failed: {res.message}")

    w = _clean_weights(res.x[:m])
    upper = float((w @ P).max())
    q = np.clip(-np.asarray(res.ineqlin.marginals, dtype=float), 0.0, None)
    # any label weighting q bounds the optimum below by min_j <p_j, q>, and the
    # largest coordinate of a distribution is at least 1/k
    lower = 1.0 / k
    if q.sum() > 0:
        lower = max(lower, float((P @ (q / q.sum())).min()))
    lower = max(lower, _polish_dual(P, w, upper))
    w, upper = _polish_vertex(P, w, upper, lower)
    gap = max(upper - lower, 0.0)
    if gap > tol:
        raise SolverError(f"LP certificate gap {gap:.3g} exceeds tolerance {tol:.3g}")
    return SolveReport(upper, w, int(res.nit), gap)


def _binary_minimax(P: np.ndarray) -> SolveReport:
    # The hull is a segment of first-class probabilities [lo, hi]; the best
    # point is 1/2 when covered, else the endpoint closest to it.
    a = P[:, 0]
    i, j = int(a.argmin()), int(a.argmax())
    w = np.zeros(P.shape[0])
    if a[i] <= 0.5 <= a[j]:
        span = a[j] - a[i]
        w[i] = (a[j] - 0.5) / span if span > 0 else 1.0
        w[j] += 1.0 - w[i]
        return SolveReport(0.5, w, 0, 0.0)
    best = i if a[i] > 0.5 else j
    w[best] = 1.0
    return SolveReport(float(P[best].max()), w, 0, 0.0)


def _polish_vertex(
    P: np.ndarray, w: np.ndarray, upper: float, target: float
) -> tuple[np.ndarray, float]:
    # Re-solve the optimal vertex: nonnegative weights on the support whose
    # active coordinates all equal the certified lower bound. Accepted only
    # if no worse, so the optimum is still evaluated at feasible weights.
    support = np.flatnonzero(w > _VANISH)
    active = np.flatnonzero(w @ P >= upper - 1e-9)
    a = np.vstack([P[np.ix_(support, active)].T, np.ones(support.size)])
    b = np.append(np.full(active.size, target), 1.0)
    ws, _ = nnls(a, b)
    if ws.sum() <= 0:
        return w, upper
    cand = np.zeros_like(w)
    cand[support] = ws / ws.sum()
    value = float((cand @ P).max())
    if value < upper:
        return cand, value
    return w, upper


def _polish_dual(P: np.ndarray, w: np.ndarray, upper: float) -> float:
    # Dual counterpart: a label weighting on the active labels that equalizes
    # the support generators. Returns a valid lower bound, or 0 if none found.
    support = np.flatnonzero(w > _VANISH)
    active = np.flatnonzero(w @ P >= upper - 1e-9)
    n = active.size
    a = np.zeros((support.size + 1, n + 1))
    a[:-1, :n] = P[np.ix_(support, active)]
    a[:-1, n] = -1.0
    a[-1, :n] = 1.0
    b = np.zeros(support.size + 1)
    b[-1] = 1.0
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    qa = sol[:n]
    if np.any(qa < 0) or qa.sum() <= 0:
        return 0.0
    return float((P[:, active] @ (qa / qa.sum())).min())


def _entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


@njit(cache=True)
def _line_search(p, dp, gamma_max):
    # Maximize S(p + g*dp) on [0, gamma_max]; S is concave along the segment so
    # we root-find its derivative -sum dp*log2(p + g*dp) (dp sums to zero).
    k = p.shape[0]
    d_end = 0.0
    for y in range(k):
        if dp[y] != 0.0:
            x = p[y] + gamma_max * dp[y]
            # Mass vanishing at the end point (up to cancellation): slope is -inf.
            if x <= _VANISH * p[y] or x <= 0.0:
                d_end = -np.inf
                break
            d_end -= dp[y] * np.log2(x)
    if d_end >= 0.0:
        return gamma_max
    lo = 0.0
    hi = gamma_max
    g = 0.5 * gamma_max
    for _ in range(200):
        d1 = 0.0
        d2 = 0.0
        for y in range(k):
            if dp[y] != 0.0:
                x = max(p[y] + g * dp[y], _TINY)
                d1 -= dp[y] * np.log2(x)
                d2 -= dp[y] * dp[y] / x
        d2 *= _INV_LN2
        if d1 > 0.0:
            lo = g
        else:
            hi = g
        if abs(d1) < 1e-14 or hi - lo < 1e-16:
            break
        step = g - d1 / d2
        if lo < step < hi:
            g = step
        else:
            g = 0.5 * (lo + hi)
    if g > gamma_max * (1.0 - 1e-12):
        return gamma_max
    return g


@njit(cache=True)
def _gradient(P, p, grad_p):
    k = p.shape[0]
    for y in range(k):
        grad_p[y] = -(np.log2(max(p[y], _TINY)) + _INV_LN2)
    return P @ grad_p


@njit(cache=True)
def _step(P, w, p, d, gamma_max, drop):
    # Exact line search along weight direction d, then renormalize.
    dp = d @ P
    gamma = _line_search(p, dp, gamma_max)
    m = w.shape[0]
    for j in range(m):
        w[j] = w[j] + gamma * d[j]
        if w[j] < _WEIGHT_FLOOR:
            w[j] = 0.0
    if drop >= 0 and gamma >= gamma_max:
        w[drop] = 0.0
    total = 0.0
    for j in range(m):
        total += w[j]
    for j in range(m):
        w[j] /= total
    return w @ P


@njit(cache=True)
def _newton_direction(P, w, p, c, d):
    # Projected Newton direction on the face spanned by the active generators:
    # maximize c.d + d'Hd/2 subject to sum(d) = 0, H = -P_A diag(1/(p ln2)) P_A'.
    m, k = P.shape
    active = np.flatnonzero(w > 0.0)
    na = active.shape[0]
    for j in range(m):
        d[j] = 0.0
    if na < 2:
        return -1.0
    kkt = np.zeros((na + 1, na + 1))
    rhs = np.zeros(na + 1)
    inv_p = np.empty(k)
    for y in range(k):
        inv_p[y] = _INV_LN2 / max(p[y], _TINY)
    # Jacobi scaling keeps the ridge meaningful when one label's mass is tiny.
    scale = np.empty(na)
    for a in range(na):
        h = 0.0
        for y in range(k):
            h += P[active[a], y] * P[active[a], y] * inv_p[y]
        scale[a] = 1.0 / np.sqrt(max(h, _TINY))
    for a in range(na):
        ja = active[a]
        for b in range(a, na):
            jb = active[b]
            h = 0.0
            for y in range(k):
                h -= P[ja, y] * P[jb, y] * inv_p[y]
            kkt[a, b] = h * scale[a] * scale[b]
            kkt[b, a] = kkt[a, b]
        kkt[a, a] -= 1e-12
        kkt[a, na] = scale[a]
        kkt[na, a] = scale[a]
        rhs[a] = -c[ja] * scale[a]
    sol = np.linalg.solve(kkt, rhs)
    ascent = 0.0
    for a in range(na):
        d[active[a]] = sol[a] * scale[a]
        ascent += c[active[a]] * d[active[a]]
    return ascent


@njit(cache=True)
def _dual_gap(P, p):
    # For any q on the simplex, max_j CE(p_j, q) bounds the hull's maximal
    # entropy from above (Gibbs). q = p gives the Frank-Wolfe gap; mixing a
    # little uniform mass into q tightens it when optimal masses are tiny.
    m, k = P.shape
    s = 0.0
    for y in range(k):
        if p[y] > 0.0:
            s -= p[y] * np.log2(p[y])
    best = np.inf
    delta = 0.0
    for step in range(17):
        worst = -np.inf
        for j in range(m):
            ce = 0.0
            for y in range(k):
                if P[j, y] > 0.0:
                    q = (1.0 - delta) * p[y] + delta / k
                    if q <= 0.0:
                        ce = np.inf
                        break
                    ce -= P[j, y] * np.log2(q)
            if ce > worst:
                worst = ce
        if worst < best:
            best = worst
        delta = 10.0 ** (step - 16)
    return max(best - s, 0.0)


@njit(cache=True)
def _entropy_ascent(P, tol, max_iter):
    # Away-step Frank-Wolfe alternated with Newton steps on the active face.
    # Stops once the certified duality gap drops below tol.
    m, k = P.shape
    w = np.full(m, 1.0 / m)
    p = w @ P
    grad_p = np.empty(k)
    d = np.empty(m)
    gap = np.inf
    it = 0
    while True:
        c = _gradient(P, p, grad_p)
        cw = 0.0
        for j in range(m):
            cw += c[j] * w[j]
        s = 0
        a = -1
        for j in range(m):
            if c[j] > c[s]:
                s = j
            if w[j] > 0.0 and (a < 0 or c[j] < c[a]):
                a = j
        gap = max(c[s] - cw, 0.0)
        if gap > tol:
            gap = min(gap, _dual_gap(P, p))
        if gap <= tol or it >= max_iter:
            break
        it += 1
        if c[s] - cw >= cw - c[a] or w[a] >= 1.0:
            for j in range(m):
                d[j] = -w[j]
            d[s] += 1.0
            p = _step(P, w, p, d, 1.0, -1)
        else:
            for j in range(m):
                d[j] = w[j]
            d[a] -= 1.0
            p = _step(P, w, p, d, w[a] / (1.0 - w[a]), a)

        c = _gradient(P, p, grad_p)
        # Negligible predicted ascent: the face optimum is reached.
        if _newton_direction(P, w, p, c, d) <= 1e-15:
            continue
        gamma_max = 1.0
        block = -1
        for j in range(m):
            if d[j] < 0.0 and -w[j] / d[j] <= gamma_max:
                gamma_max = -w[j] / d[j]
                block = j
        p = _step(P, w, p, d, gamma_max, block)
    return w, p, it, gap


def maximize_entropy_over_hull(
    cs: CredalSet, tol: float = ENTROPY_TOLERANCE, max_iter: int = MAX_ITERATIONS
) -> SolveReport:
    """Largest Shannon entropy (bits) over the convex hull of ``cs``.

    Away-step Frank-Wolfe on the mixture weights with exact line search, each
    step followed by a Newton step restricted to the current active face.
    ``certified_gap`` is ``max_j CE(p_j, q) - S(p)`` for the best of a few
    smoothed copies ``q`` of the iterate ``p``; by Gibbs' inequality this
    upper-bounds the suboptimality, and with ``q = p`` it is exactly the
    Frank-Wolfe duality gap. If ``max_iter`` is reached first, the report has
    ``converged=False`` and a :class:`SolverWarning` is emitted.
    """
    P = cs.probs
    m = P.shape[0]
    support = P.max(axis=0) > 0
    P = P[:, support]
    if m == 1:
        return SolveReport(_entropy_bits(P[0]), np.ones(1), 0, 0.0)

    w, p, it, gap = _entropy_ascent(np.ascontiguousarray(P), float(tol), int(max_iter))

    converged = gap <= tol
    if not converged:
        warnings.warn(
            f"entropy maximization stopped at {it} iterations with gap {gap:.3g}",
            SolverWarning,
            stacklevel=2,
        )
    return SolveReport(_entropy_bits(p), w, it, gap, converged)
