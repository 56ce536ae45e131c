"""The local polytope: vertices, membership, Bell-inequality certificates."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import ratlp
from .core import ZERO, Behaviour, Setting, deterministic_point
from .errors import CapExceeded, NotLocal, NotViolating, SettingMismatch
from .ratlp import to_fraction

DEFAULT_VERTEX_CAP = 10**6

_VERTEX_CACHE: dict[Setting, "VertexTable"] = {}


@dataclass(frozen=True)
class DeterministicPoint:
    setting: Setting
    f: tuple
    g: tuple

    def behaviour(self) -> Behaviour:
        return deterministic_point(self.setting, self.f, self.g)

    def index(self) -> int:
        """Position in lexicographic ``(f, g)`` order."""
        s = self.setting
        i = 0
        for v in self.f:
            i = i * s.dA + v
        for v in self.g:
            i = i * s.dB + v
        return i


@dataclass(frozen=True)
class VertexTable:
    """All deterministic points of a setting as rows of a 0/1 matrix."""

    setting: Setting
    fs: tuple
    gs: tuple
    matrix: np.ndarray  # (n_vertices, size), int8

    def __len__(self):
        return self.matrix.shape[0]

    def point(self, i) -> DeterministicPoint:
        ng = len(self.gs)
        return DeterministicPoint(self.setting, self.fs[i // ng], self.gs[i % ng])

    def points(self):
        return [self.point(i) for i in range(len(self))]


def build_vertex_table(setting: Setting, cap: int = DEFAULT_VERTEX_CAP) -> VertexTable:
    n = setting.n_deterministic
    if n > cap:
        raise CapExceeded(f"deterministic points of {setting}", n, cap)
    mA, mB, dA, dB = setting.shape
    fs = tuple(itertools.product(range(dA), repeat=mA))
    gs = tuple(itertools.product(range(dB), repeat=mB))
    M = np.zeros((n, setting.size), dtype=np.int8)
    xs, ys = np.meshgrid(np.arange(mA), np.arange(mB), indexing="ij")
    for i, f in enumerate(fs):
        fa = np.array(f)[xs]
        for j, g in enumerate(gs):
            gb = np.array(g)[ys]
            idx = ((xs * mB + ys) * dA + fa) * dB + gb
            M[i * len(gs) + j, idx.reshape(-1)] = 1
    M.setflags(write=False)
    return VertexTable(setting, fs, gs, M)


def vertex_table(setting: Setting, cap: int = DEFAULT_VERTEX_CAP) -> VertexTable:
    n = setting.n_deterministic
    if n > cap:
        raise CapExceeded(f"deterministic points of {setting}", n, cap)
    vt = _VERTEX_CACHE.get(setting)
    if vt is None:
        vt = _VERTEX_CACHE[setting] = build_vertex_table(setting, cap)
    return vt


def seed_vertex_table(vt: VertexTable):
    """Install a table loaded from elsewhere (the on-disk cache)."""
    _VERTEX_CACHE[vt.setting] = vt


def enumerate_deterministic(setting: Setting, cap: int = DEFAULT_VERTEX_CAP) -> list[DeterministicPoint]:
    """All ``dA**mA * dB**mB`` deterministic points in lexicographic ``(f, g)`` order."""
    return vertex_table(setting, cap).points()


def scale_to_int(values) -> tuple[np.ndarray, int]:
    """Common-denominator integer numerators of a rational vector."""
    values = [to_fraction(v) for v in values]
    den = math.lcm(*(v.denominator for v in values)) if values else 1
    nums = [v.numerator * (den // v.denominator) for v in values]
    big = max((abs(v) for v in nums), default=0) >= 2**40
    return np.array(nums, dtype=object if big else np.int64), den


def sweep(matrix: np.ndarray, s) -> list[Fraction]:
    """Exact ``s . d`` for every row ``d`` of a 0/1 matrix."""
    nums, den = scale_to_int(s)
    if nums.dtype == object:
        vals = matrix.astype(object) @ nums
    else:
        vals = matrix.astype(np.int64) @ nums
    return [Fraction(int(v), den) for v in vals]


@dataclass(frozen=True)
class BellFunctional:
    """``s . p <= S`` for every local ``p``."""

    setting: Setting
    s: tuple
    S: Fraction

    def value(self, p: Behaviour) -> Fraction:
        if p.setting != self.setting:
            raise SettingMismatch(f"functional on {self.setting}, behaviour on {p.setting}")
        return sum((a * b for a, b in zip(self.s, p.flat) if a and b), ZERO)

    def vertex_values(self, cap: int = DEFAULT_VERTEX_CAP) -> list[Fraction]:
        return sweep(vertex_table(self.setting, cap).matrix, self.s)

    def local_bound(self, cap: int = DEFAULT_VERTEX_CAP) -> Fraction:
        return max(self.vertex_values(cap))

    def scaled(self, factor) -> "BellFunctional":
        factor = to_fraction(factor)
        return BellFunctional(self.setting, tuple(v * factor for v in self.s), self.S * factor)

    def to_json(self) -> dict:
        st = self.setting
        return {
            "mA": st.mA, "mB": st.mB, "dA": st.dA, "dB": st.dB,
            "s": [str(v) for v in self.s],
            "S": str(self.S),
        }

    @classmethod
    def from_json(cls, obj, setting: Optional[Setting] = None) -> "BellFunctional":
        if setting is None:
            setting = Setting(int(obj["mA"]), int(obj["mB"]), int(obj["dA"]), int(obj["dB"]))
        s = tuple(Fraction(v) if isinstance(v, str) else to_fraction(v) for v in obj["s"])
        if len(s) != setting.size:
            raise SettingMismatch(f"functional has {len(s)} entries, {setting} needs {setting.size}")
        S = obj["S"]
        return cls(setting, s, Fraction(S) if isinstance(S, str) else to_fraction(S))


@dataclass(frozen=True)
class Local:
    weights: dict  # DeterministicPoint -> Fraction, nonzero entries only
    is_local: bool = field(default=True, init=False)

    def reconstruct(self) -> np.ndarray:
        setting = next(iter(self.weights)).setting
        acc = np.full(setting.shape, ZERO, dtype=object)
        for d, w in self.weights.items():
            acc = acc + w * d.behaviour().table
        return acc


@dataclass(frozen=True)
class Nonlocal:
    functional: BellFunctional
    violation: Fraction
    is_local: bool = field(default=False, init=False)


def membership_problem(p: Behaviour, cap: int = DEFAULT_VERTEX_CAP) -> ratlp.LPProblem:
    """Weights ``mu >= 0`` over vertices with ``sum mu_i d_i = p`` and ``sum mu = 1``."""
    vt = vertex_table(p.setting, cap)
    A = np.vstack([vt.matrix.T, np.ones((1, len(vt)), dtype=np.int8)])
    b = list(p.flat) + [Fraction(1)]
    return ratlp.LPProblem.build([0] * len(vt), A.tolist(), [ratlp.EQ] * len(b), b)


def _weights(vt: VertexTable, x) -> dict:
    return {vt.point(i): w for i, w in enumerate(x) if w}


def _strongest_functional(p: Behaviour, vt: VertexTable) -> BellFunctional:
    """Maximise ``s . p`` over ``-1 <= s . d <= 1`` (all vertices ``d``)."""
    n = p.setting.size
    rows = vt.matrix.tolist()
    lp = ratlp.LPProblem.build(
        list(p.flat),
        rows + rows,
        [ratlp.LE] * len(rows) + [ratlp.GE] * len(rows),
        [1] * len(rows) + [-1] * len(rows),
        sense="max",
        lower=[None] * n,
    )
    out = ratlp.solve(lp)
    assert out.status == ratlp.OPTIMAL, out.status
    s = tuple(out.primal)
    return BellFunctional(p.setting, s, max(sweep(vt.matrix, s)))


def is_local(p: Behaviour, cap: int = DEFAULT_VERTEX_CAP, certificate: str = "strongest"):
    """Decide ``p`` in the local polytope.

    Returns :class:`Local` with an exact convex decomposition, or
    :class:`Nonlocal` with a Bell functional whose bound is recomputed by a
    sweep over all vertices. ``certificate="farkas"`` returns the functional
    read off the infeasibility certificate of the membership problem;
    ``"strongest"`` (default) returns one maximising the violation among
    functionals bounded by 1 in absolute value on every vertex.
    """
    vt = vertex_table(p.setting, cap)
    lp = membership_problem(p, cap)
    out = ratlp.solve(lp)
    if out.status == ratlp.OPTIMAL:
        return Local(_weights(vt, out.primal))
    if certificate == "farkas":
        y = out.farkas
        s = tuple(-v for v in y[:-1])
        func = BellFunctional(p.setting, s, max(sweep(vt.matrix, s)))
    else:
        func = _strongest_functional(p, vt)
    violation = func.value(p) - func.S
    assert violation > 0
    return Nonlocal(func, violation)


def local_decomposition(p: Behaviour, cap: int = DEFAULT_VERTEX_CAP) -> dict:
    verdict = is_local(p, cap)
    if not verdict.is_local:
        raise NotLocal(f"behaviour violates a Bell inequality by {verdict.violation}")
    return verdict.weights


def chsh_functional(setting: Setting) -> BellFunctional:
    """CHSH with outputs 1, 2 valued +1, -1 and any further output valued 0."""
    if setting.mA != 2 or setting.mB != 2:
        from .errors import BadSetting

        raise BadSetting(f"CHSH needs two inputs per party, setting is {setting}")
    def val(o):
        return 1 if o == 0 else (-1 if o == 1 else 0)
    s = [Fraction(0)] * setting.size
    for x, y, a, b in itertools.product(range(2), range(2), range(setting.dA), range(setting.dB)):
        sign = -1 if (x, y) == (1, 1) else 1
        s[setting.index(a, b, x, y)] = Fraction(sign * val(a) * val(b))
    return BellFunctional(setting, tuple(s), Fraction(2))


def normalize_certificate(c: BellFunctional, p: Behaviour, mode: str = "default",
                          cap: int = DEFAULT_VERTEX_CAP) -> BellFunctional:
    """Rescale ``c`` by a positive rational.

    The bound is first tightened to the vertex maximum. A positive bound goes
    to 1 (``mode="chsh"``: 2); a zero bound leaves ``S = 0`` and scales ``s`` to
    unit max-norm; a negative bound goes to -1.
    """
    values = c.vertex_values(cap)
    top = max(values)
    if c.value(p) <= top:
        raise NotViolating(f"s.p = {c.value(p)} does not exceed the local bound {top}")
    target = Fraction(2) if mode == "chsh" else Fraction(1)
    tight = BellFunctional(c.setting, c.s, top)
    if top > 0:
        return tight.scaled(target / top)
    if top == 0:
        return tight.scaled(Fraction(1) / max(abs(v) for v in c.s))
    return tight.scaled(Fraction(1) / -top)
