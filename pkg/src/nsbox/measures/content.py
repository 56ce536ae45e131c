"""Nonlocal content (EPR2) and robustness of nonlocality, both exact LPs."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .. import ratlp
from ..core import ZERO, Behaviour, validate
from ..localset import DEFAULT_VERTEX_CAP, vertex_table
from .result import MeasureResult


def _combine(vt, weights) -> np.ndarray:
    acc = np.full(vt.setting.size, ZERO, dtype=object)
    for i, w in weights.items():
        acc = acc + w * vt.matrix[i].astype(object)
    return acc


def _as_behaviour(setting, flat) -> Behaviour:
    return validate(list(flat), setting)


def epr2(p: Behaviour, cap: int = DEFAULT_VERTEX_CAP) -> MeasureResult:
    """``1 - P_L`` with ``P_L = max sum mu`` subject to ``sum mu_i d_i <= p``."""
    vt = vertex_table(p.setting, cap)
    n = len(vt)
    lp = ratlp.LPProblem.build(
        [1] * n, vt.matrix.T.tolist(), [ratlp.LE] * p.setting.size, list(p.flat), sense="max"
    )
    out = ratlp.solve(lp)
    assert out.status == ratlp.OPTIMAL, out.status
    local_weight = out.objective_value
    mu = {i: w for i, w in enumerate(out.primal) if w}
    witness = {
        "local_weight": local_weight,
        "local_part": {vt.point(i): w for i, w in mu.items()},
    }
    if local_weight < 1:
        residual = (np.array(p.flat, dtype=object) - _combine(vt, mu)) / (1 - local_weight)
        witness["residual"] = _as_behaviour(p.setting, residual)
    return MeasureResult("epr2", 1 - local_weight, witness)


def robustness(p: Behaviour, cap: int = DEFAULT_VERTEX_CAP) -> MeasureResult:
    """Least ``q`` such that ``(1 - q) p + q L`` is local for some local ``L``.

    Variables are ``q``, ``lam_i = q * w_i`` (weights of ``L``) and ``mu_j``
    (weights of the local mixture).
    """
    vt = vertex_table(p.setting, cap)
    n = len(vt)
    N = p.setting.size
    M = vt.matrix.T.astype(np.int64)
    pv = list(p.flat)
    rows = []
    for k in range(N):
        rows.append([-pv[k]] + M[k].tolist() + (-M[k]).tolist())
    rows.append([-1] + [1] * n + [0] * n)
    rows.append([0] + [0] * n + [1] * n)
    b = [-v for v in pv] + [0, 1]
    lp = ratlp.LPProblem.build(
        [1] + [0] * (2 * n), rows, [ratlp.EQ] * len(rows), b,
        upper=[1] + [None] * (2 * n),
    )
    out = ratlp.solve(lp)
    assert out.status == ratlp.OPTIMAL, out.status
    q = out.primal[0]
    lam = {i: w for i, w in enumerate(out.primal[1:n + 1]) if w}
    mu = {i: w for i, w in enumerate(out.primal[n + 1:]) if w}
    witness = {"target": {vt.point(i): w for i, w in mu.items()}}
    if q > 0:
        witness["noise"] = _as_behaviour(p.setting, _combine(vt, lam) / q)
        witness["noise_decomposition"] = {vt.point(i): w / q for i, w in lam.items()}
    return MeasureResult("robustness", q, witness)
