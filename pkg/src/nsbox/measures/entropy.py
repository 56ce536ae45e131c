"""KL divergence between behaviours and the relative entropy of nonlocality."""

from __future__ import annotations

import math

import numpy as np

from ..core import Behaviour
from ..errors import SettingMismatch, SupportInfeasible
from ..localset import DEFAULT_VERTEX_CAP, vertex_table
from .result import MeasureResult

LN2 = math.log(2)


def kl_divergence(p1: Behaviour, p2: Behaviour, per_input: bool = False) -> float:
    """``sum P1 log2(P1 / P2)`` over all entries; ``inf`` on a support violation.

    ``per_input=True`` divides by the number of input pairs.
    """
    if p1.setting != p2.setting:
        raise SettingMismatch(f"{p1.setting} vs {p2.setting}")
    total = 0.0
    for u, v in zip(p1.flat, p2.flat):
        if u:
            if not v:
                return math.inf
            total += float(u) * math.log2(u / v)
    if per_input:
        total /= p1.setting.mA * p1.setting.mB
    return total


def _objective(P, L, mask):
    return float(np.sum(P[mask] * np.log2(P[mask] / L[mask])))


def _line_search(P, L, d, mask, gmax, iters=60):
    """Minimise ``phi(t) = D(P || L + t d)`` on ``[0, gmax]`` by safeguarded Newton."""
    Pm, Lm, dm = P[mask], L[mask], d[mask]

    def dphi(t):
        den = Lm + t * dm
        return -np.sum(Pm * dm / den) / LN2, np.sum(Pm * dm * dm / (den * den)) / LN2

    g_hi, _ = dphi(gmax) if np.all(Lm + gmax * dm > 0) else (math.inf, 0)
    if g_hi <= 0:
        return gmax
    lo, hi = 0.0, gmax
    t = 0.0
    for _ in range(iters):
        g, h = dphi(t)
        if abs(g) < 1e-15:
            return t
        if g > 0:
            hi = t
        else:
            lo = t
        if hi - lo < 1e-16 * max(1.0, gmax):
            return lo
        step = t - g / h if h > 0 else math.nan
        t = step if lo < step < hi else 0.5 * (lo + hi)
    return lo


def relative_entropy_nl(p: Behaviour, gap_tol: float = 1e-9, max_iter: int = 10_000,
                        cap: int = DEFAULT_VERTEX_CAP) -> MeasureResult:
    """``min_L D(p || L)`` over local ``L`` by pairwise Frank-Wolfe.

    Iterates over convex weights on the deterministic points, starting from
    the uniform weights (full support). Each step moves mass from the worst
    active vertex to the best vertex of the linear subproblem with an exact
    line search. The Frank-Wolfe gap bounds the distance to the optimum, so
    the true value lies in ``[value - gap, value]``.
    """
    vt = vertex_table(p.setting, cap)
    V = vt.matrix.astype(float)
    P = np.array([float(v) for v in p.flat])
    mask = P > 0
    nv = len(vt)
    w = np.full(nv, 1.0 / nv)
    L = w @ V
    if np.any(L[mask] <= 0):
        raise SupportInfeasible("no local behaviour covers the support")
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        grad = np.zeros_like(P)
        grad[mask] = -P[mask] / (L[mask] * LN2)
        scores = V @ grad
        s = int(np.argmin(scores))
        active = np.flatnonzero(w > 0)
        v = int(active[np.argmax(scores[active])])
        gap = float(w @ scores - scores[s])
        if gap <= gap_tol or s == v:
            break
        d = V[s] - V[v]
        t = _line_search(P, L, d, mask, w[v])
        if t >= w[v]:
            t = w[v]
            w[s] += t
            w[v] = 0.0
        else:
            w[s] += t
            w[v] -= t
        L = w @ V
    value = max(_objective(P, L, mask), 0.0)
    weights = {vt.point(i): float(w[i]) for i in np.flatnonzero(w > 1e-15)}
    return MeasureResult(
        "relent", value,
        {"weights": weights, "gap": gap, "iterations": it},
        (max(value - gap, 0.0), value),
    )
