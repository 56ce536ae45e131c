"""Communication cost of simulating a behaviour.

Protocol model: one simultaneous round. Alice sends a message computed from
``x``, Bob one computed from ``y``; then ``a = f(x, msg_B)`` and
``b = g(y, msg_A)``. Bob's message must separate every pair of inputs on
which ``f`` differs, so his cheapest message has ``ceil(log2 k)`` bits with
``k`` the number of distinct columns ``y -> f(., y)``; likewise for Alice
and ``g``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import ratlp
from ..core import Behaviour, Setting
from ..errors import CapExceeded
from ..localset import scale_to_int
from .result import MeasureResult

DEFAULT_STRATEGY_CAP = 10**5


def _bits(k: int) -> int:
    return (k - 1).bit_length()


@dataclass(frozen=True)
class CommStrategy:
    """Deterministic strategy: ``f[x][y]`` is Alice's output, ``g[x][y]`` Bob's."""

    setting: Setting
    f: tuple
    g: tuple
    cost: int

    @staticmethod
    def cost_of(f, g) -> int:
        bob_msg = len({tuple(row[y] for row in f) for y in range(len(f[0]))})
        alice_msg = len(set(g))
        return _bits(alice_msg) + _bits(bob_msg)

    def support(self) -> list[int]:
        s = self.setting
        return [s.index(self.f[x][y], self.g[x][y], x, y) for x in range(s.mA) for y in range(s.mB)]

    def vector(self) -> np.ndarray:
        v = np.zeros(self.setting.size, dtype=np.int8)
        v[self.support()] = 1
        return v

    def to_json(self) -> dict:
        return {
            "f": [[v + 1 for v in row] for row in self.f],
            "g": [[v + 1 for v in row] for row in self.g],
            "cost": self.cost,
        }


def max_cost(setting: Setting) -> int:
    return _bits(setting.mA) + _bits(setting.mB)


def strategy_count(setting: Setting) -> int:
    cells = setting.mA * setting.mB
    return setting.dA**cells * setting.dB**cells


def enumerate_strategies(setting: Setting, max_bits: int | None = None,
                         cap: int = DEFAULT_STRATEGY_CAP) -> list[CommStrategy]:
    """Strategies of cost at most ``max_bits`` (all of them by default).

    Order: ``f`` outer, ``g`` inner, each lexicographic in row-major ``(x, y)``.
    """
    n = strategy_count(setting)
    if n > cap:
        raise CapExceeded(f"communication strategies of {setting}", n, cap)
    mA, mB, dA, dB = setting.shape
    if max_bits is None:
        max_bits = max_cost(setting)

    def tables(d):
        for flat in itertools.product(range(d), repeat=mA * mB):
            yield tuple(tuple(flat[x * mB:(x + 1) * mB]) for x in range(mA))

    gs = list(tables(dB))
    out = []
    for f in tables(dA):
        for g in gs:
            c = CommStrategy.cost_of(f, g)
            if c <= max_bits:
                out.append(CommStrategy(setting, f, g, c))
    return out


def _decomposition_lp(p: Behaviour, columns: np.ndarray, objective):
    rows = np.vstack([columns.T, np.ones((1, columns.shape[0]), dtype=np.int64)]).tolist()
    b = list(p.flat) + [1]
    return ratlp.LPProblem.build(objective, rows, [ratlp.EQ] * len(rows), b)


@lru_cache(maxsize=16)
def _strategy_table(setting: Setting, cap: int):
    strategies = tuple(enumerate_strategies(setting, cap=cap))
    M = np.stack([s.vector() for s in strategies]).astype(np.int64)
    costs = np.array([s.cost for s in strategies], dtype=np.int64)
    return strategies, M, costs


def _min_cost_decomposition(p: Behaviour, M: np.ndarray, costs: np.ndarray, batch: int = 25):
    """Exact column generation for ``min c.w`` s.t. ``M^T w = p``, ``sum w = 1``.

    The restricted problem starts from the cost-0 columns plus ``p`` itself
    priced above every strategy, which keeps it feasible; an optimal solution
    never uses that column. Pricing is an exact integer sweep of the reduced
    costs over all columns.
    """
    top = int(costs.max()) + 1
    active = list(np.flatnonzero(costs == 0))
    pv = list(p.flat)
    while True:
        rows = [row + [pv[k]] for k, row in enumerate(M[active].T.tolist())]
        rows.append([1] * (len(active) + 1))
        objective = costs[active].tolist() + [top]
        lp = ratlp.LPProblem.build(objective, rows, [ratlp.EQ] * len(rows), pv + [1])
        out = ratlp.solve(lp)
        assert out.status == ratlp.OPTIMAL, out.status
        y_nums, y_den = scale_to_int(out.dual)
        y_nums = y_nums.astype(object)
        priced = (M.astype(object) @ y_nums[:-1]) + y_nums[-1]
        reduced = costs.astype(object) * y_den - priced
        candidates = [j for j in np.argsort(reduced, kind="stable") if reduced[j] < 0][:batch]
        if not candidates:
            assert out.primal[-1] == 0
            return active, out
        active += [int(j) for j in candidates if j not in active]


def comm_cost_avg(p: Behaviour, cap: int = DEFAULT_STRATEGY_CAP) -> MeasureResult:
    """Least average cost over convex decompositions into strategies."""
    strategies, M, costs = _strategy_table(p.setting, cap)
    active, out = _min_cost_decomposition(p, M, costs)
    weights = {strategies[j]: w for j, w in zip(active, out.primal) if w}
    return MeasureResult("comm_avg", out.objective_value, {"decomposition": weights})


def comm_cost_worst(p: Behaviour, cap: int = DEFAULT_STRATEGY_CAP) -> MeasureResult:
    """Least ``c`` such that strategies of cost at most ``c`` suffice."""
    strategies, M, costs = _strategy_table(p.setting, cap)
    for c in range(max_cost(p.setting) + 1):
        idx = np.flatnonzero(costs <= c)
        out = ratlp.solve(_decomposition_lp(p, M[idx], [0] * len(idx)))
        if out.status == ratlp.OPTIMAL:
            weights = {strategies[j]: w for j, w in zip(idx, out.primal) if w}
            return MeasureResult("comm_worst", Fraction(c), {"decomposition": weights})
    raise AssertionError("no decomposition even with full communication")
