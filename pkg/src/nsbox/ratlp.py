"""Exact rational linear programming.

A dense two-phase primal simplex on a tableau of :class:`gmpy2.mpq` entries.
Pivoting follows Bland's rule, so every solve terminates, and every outcome
carries a certificate that :func:`verify` can re-check by exact substitution:

* ``Optimal``: primal point, dual multipliers, equal objectives.
* ``Infeasible``: Farkas multipliers whose combination of the constraints is
  contradictory.
* ``Unbounded``: a feasible point and an improving ray.

The public API speaks :class:`fractions.Fraction`; ``mpq`` is used only inside
the tableau because it is several times faster.

Sign conventions for multipliers ``y`` (one per constraint row, followed by one
per finite upper bound in variable order):

* minimisation: ``y >= 0`` on ``>=`` rows, ``y <= 0`` on ``<=`` rows, free on
  ``==`` rows; reduced costs ``c - A^T y`` are ``>= 0`` on variables with a
  finite lower bound and ``0`` on free variables. For maximisation every sign
  flips.
* Farkas: ``y >= 0`` on ``<=`` rows, ``y <= 0`` on ``>=`` rows; ``w = A^T y``
  satisfies ``w >= 0`` (``w == 0`` for free variables) and
  ``b.y < sum(lower_j * w_j)``, which no feasible point can satisfy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from gmpy2 import mpq

from .errors import ShapeMismatch

log = logging.getLogger(__name__)

LE, EQ, GE = "<=", "==", ">="
OPTIMAL, INFEASIBLE, UNBOUNDED = "Optimal", "Infeasible", "Unbounded"

_RELATIONS = {"<=": LE, "==": EQ, "=": EQ, ">=": GE}


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if type(v).__name__ == "mpq":
        return Fraction(int(v.numerator), int(v.denominator))
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        raise TypeError("floats are not exact; pass Fraction or int")
    return Fraction(v)


def _q(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def _frac_vec(vals) -> list[Fraction]:
    return [to_fraction(v) for v in vals]


@dataclass(frozen=True)
class LPProblem:
    """``min/max c.x`` subject to ``A_i x (rel_i) b_i`` and ``lower <= x <= upper``.

    ``lower[j] = None`` makes ``x_j`` free; ``upper[j] = None`` leaves it
    unbounded above. Rows are stored as an object array of Fractions.
    """

    objective: tuple
    A: np.ndarray
    rel: tuple
    b: tuple
    sense: str = "min"
    lower: tuple = ()
    upper: tuple = ()

    @classmethod
    def build(cls, objective, A=None, rel=(), b=(), sense="min", lower=None, upper=None):
        c = tuple(_frac_vec(objective))
        n = len(c)
        if A is None or len(A) == 0:
            A = np.empty((0, n), dtype=object)
        else:
            A = np.array([[to_fraction(v) for v in row] for row in A], dtype=object)
            if A.ndim != 2:
                raise ShapeMismatch("constraint matrix must be two-dimensional")
        rel = tuple(_RELATIONS[r] for r in rel)
        b = tuple(_frac_vec(b))
        if A.shape[1] != n or len(rel) != A.shape[0] or len(b) != A.shape[0]:
            raise ShapeMismatch(f"rows must have length {n}; got A{A.shape}, {len(rel)} relations, {len(b)} rhs")
        if lower is None:
            lower = (Fraction(0),) * n
        else:
            lower = tuple(None if v is None else to_fraction(v) for v in lower)
        if upper is None:
            upper = (None,) * n
        else:
            upper = tuple(None if v is None else to_fraction(v) for v in upper)
        if len(lower) != n or len(upper) != n:
            raise ShapeMismatch("bounds must have one entry per variable")
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', not {sense!r}")
        A.setflags(write=False)
        return cls(c, A, rel, b, sense, lower, upper)

    @classmethod
    def from_rows(cls, objective, rows, **kw):
        """Build from ``[(coeffs, rel, rhs), ...]``."""
        rows = list(rows)
        return cls.build(objective, [r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows], **kw)

    @property
    def nvars(self) -> int:
        return len(self.objective)

    @property
    def constraints(self):
        return [(tuple(self.A[i]), self.rel[i], self.b[i]) for i in range(self.A.shape[0])]

    def full_rows(self):
        """Constraint rows followed by one ``x_j <= u_j`` row per finite upper bound."""
        n = self.nvars
        A = [list(self.A[i]) for i in range(self.A.shape[0])]
        rel = list(self.rel)
        b = list(self.b)
        for j, u in enumerate(self.upper):
            if u is not None:
                row = [Fraction(0)] * n
                row[j] = Fraction(1)
                A.append(row)
                rel.append(LE)
                b.append(u)
        return A, rel, b


@dataclass
class LPOutcome:
    status: str
    primal: Optional[list] = None
    dual: Optional[list] = None
    objective_value: Optional[Fraction] = None
    farkas: Optional[list] = None
    ray: Optional[list] = None
    pivots: int = field(default=0, compare=False)


class _Tableau:
    def __init__(self, T, basis, m, ncols):
        self.T = T
        self.basis = basis
        self.m = m
        self.ncols = ncols
        self.pivots = 0

    def pivot(self, r, j):
        T = self.T
        T[r] = T[r] / T[r, j]
        col = T[:, j].copy()
        col[r] = 0
        nz = np.flatnonzero(col != 0)
        if len(nz):
            T[nz] -= np.outer(col[nz], T[r])
        self.basis[r] = j
        self.pivots += 1
        if log.isEnabledFor(logging.DEBUG):
            log.debug("pivot %d: row %d col %d\n%s", self.pivots, r, j, self.T)

    def run(self, allowed):
        """Bland's rule until optimal; returns the unbounded column or None."""
        T, m = self.T, self.m
        while True:
            rc = T[-1, : self.ncols]
            neg = np.flatnonzero((rc < 0) & allowed)
            if len(neg) == 0:
                return None
            j = int(neg[0])
            col = T[:m, j]
            rows = np.flatnonzero(col > 0)
            if len(rows) == 0:
                return j
            best = None
            for i in rows:
                ratio = T[i, -1] / col[i]
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            self.pivot(int(best[1]), j)


def solve(lp: LPProblem) -> LPOutcome:
    """Solve ``lp`` exactly. Deterministic: identical input, identical certificates."""
    n = lp.nvars
    A_full, rel_full, b_full = lp.full_rows()
    m = len(A_full)

    # structural columns: (original variable, sign); free variables split in two
    cols = []
    for j in range(n):
        cols.append((j, 1))
        if lp.lower[j] is None:
            cols.append((j, -1))
    shift = [lp.lower[j] if lp.lower[j] is not None else Fraction(0) for j in range(n)]
    nstruct = len(cols)

    rows_q = []
    rhs_q = []
    rels = []
    flipped = []
    for i in range(m):
        row = A_full[i]
        rhs = b_full[i] - sum((row[j] * shift[j] for j in range(n) if shift[j]), Fraction(0))
        r = rel_full[i]
        flip = rhs < 0
        if flip:
            rhs = -rhs
            r = {LE: GE, GE: LE, EQ: EQ}[r]
        sgn = -1 if flip else 1
        rows_q.append([_q(sgn * s * row[j]) for j, s in cols])
        rhs_q.append(_q(rhs))
        rels.append(r)
        flipped.append(flip)

    nslack = sum(1 for r in rels if r != EQ)
    art_rows = [i for i in range(m) if rels[i] != LE]
    nart = len(art_rows)
    ncols = nstruct + nslack + nart
    T = np.empty((m + 1, ncols + 1), dtype=object)
    T[:, :] = mpq(0)
    basis = [0] * m
    init_col = [0] * m
    is_art = np.zeros(ncols, dtype=bool)
    s = nstruct
    a = nstruct + nslack
    for i in range(m):
        T[i, :nstruct] = rows_q[i]
        T[i, -1] = rhs_q[i]
        if rels[i] == LE:
            T[i, s] = mpq(1)
            basis[i] = init_col[i] = s
            s += 1
        else:
            if rels[i] == GE:
                T[i, s] = mpq(-1)
                s += 1
            T[i, a] = mpq(1)
            is_art[a] = True
            basis[i] = init_col[i] = a
            a += 1

    tab = _Tableau(T, basis, m, ncols)

    # phase 1: minimise the sum of artificials
    if nart:
        T[-1, :] = mpq(0)
        T[-1, is_art.nonzero()[0]] = mpq(1)
        for i in art_rows:
            T[-1] -= T[i]
        tab.run(np.ones(ncols, dtype=bool))
        if T[-1, -1] != 0:
            y_std = [(mpq(1) if is_art[init_col[i]] else mpq(0)) - T[-1, init_col[i]] for i in range(m)]
            farkas = [to_fraction(-v if not flipped[i] else v) for i, v in enumerate(y_std)]
            return LPOutcome(INFEASIBLE, farkas=farkas, pivots=tab.pivots)
        # drive remaining artificials out of the basis; rows with no structural
        # entry are redundant and keep a zero artificial forever
        for i in range(m):
            if is_art[basis[i]]:
                nz = np.flatnonzero((T[i, :ncols] != 0) & ~is_art)
                if len(nz):
                    tab.pivot(i, int(nz[0]))

    # phase 2
    sgn = 1 if lp.sense == "min" else -1
    cost = np.empty(ncols + 1, dtype=object)
    cost[:] = mpq(0)
    for k, (j, sj) in enumerate(cols):
        cost[k] = _q(sgn * sj * lp.objective[j])
    T[-1] = cost
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0:
            T[-1] -= cb * T[i]
    unb = tab.run(~is_art)

    x_int = [mpq(0)] * ncols
    for i in range(m):
        x_int[basis[i]] = T[i, -1]
    x = list(shift)
    for k, (j, sj) in enumerate(cols):
        if x_int[k] != 0:
            x[j] += sj * to_fraction(x_int[k])
    objval = sum((c * v for c, v in zip(lp.objective, x)), Fraction(0))

    if unb is not None:
        d_int = [mpq(0)] * ncols
        d_int[unb] = mpq(1)
        for i in range(m):
            d_int[basis[i]] = -T[i, unb]
        ray = [Fraction(0)] * n
        for k, (j, sj) in enumerate(cols):
            if d_int[k] != 0:
                ray[j] += sj * to_fraction(d_int[k])
        return LPOutcome(UNBOUNDED, primal=x, objective_value=objval, ray=ray, pivots=tab.pivots)

    y = []
    for i in range(m):
        v = -T[-1, init_col[i]]
        if flipped[i]:
            v = -v
        y.append(to_fraction(sgn * v))
    return LPOutcome(OPTIMAL, primal=x, dual=y, objective_value=objval, pivots=tab.pivots)


def _dot(u, v):
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


def _holds(lhs, rel, rhs):
    if rel == LE:
        return lhs <= rhs
    if rel == GE:
        return lhs >= rhs
    return lhs == rhs


def _primal_feasible(lp, A, rel, b, x):
    for j in range(lp.nvars):
        if lp.lower[j] is not None and x[j] < lp.lower[j]:
            return False
        if lp.upper[j] is not None and x[j] > lp.upper[j]:
            return False
    return all(_holds(_dot(A[i], x), rel[i], b[i]) for i in range(len(A)))


def _column_sums(A, y, n):
    w = [Fraction(0)] * n
    for i, row in enumerate(A):
        if y[i]:
            for j in range(n):
                if row[j]:
                    w[j] += y[i] * row[j]
    return w


def verify(lp: LPProblem, out: LPOutcome) -> bool:
    """Re-check every certificate identity of ``out`` exactly."""
    n = lp.nvars
    A, rel, b = lp.full_rows()
    m = len(A)
    try:
        if out.status == OPTIMAL:
            if len(out.primal) != n or len(out.dual) != m:
                raise ShapeMismatch("certificate length does not match the problem")
            x = _frac_vec(out.primal)
            if not _primal_feasible(lp, A, rel, b, x):
                return False
            if out.objective_value != _dot(lp.objective, x):
                return False
            sgn = 1 if lp.sense == "min" else -1
            y = [sgn * to_fraction(v) for v in out.dual]
            for i in range(m):
                if (rel[i] == GE and y[i] < 0) or (rel[i] == LE and y[i] > 0):
                    return False
            w = _column_sums(A, y, n)
            bound = _dot(b, y)
            for j in range(n):
                r = sgn * lp.objective[j] - w[j]
                if lp.lower[j] is None:
                    if r != 0:
                        return False
                else:
                    if r < 0:
                        return False
                    bound += lp.lower[j] * r
            return sgn * out.objective_value == bound
        if out.status == INFEASIBLE:
            if len(out.farkas) != m:
                raise ShapeMismatch("Farkas vector length does not match the problem")
            y = _frac_vec(out.farkas)
            for i in range(m):
                if (rel[i] == LE and y[i] < 0) or (rel[i] == GE and y[i] > 0):
                    return False
            w = _column_sums(A, y, n)
            rhs = Fraction(0)
            for j in range(n):
                if lp.lower[j] is None:
                    if w[j] != 0:
                        return False
                else:
                    if w[j] < 0:
                        return False
                    rhs += lp.lower[j] * w[j]
            return _dot(b, y) < rhs
        if out.status == UNBOUNDED:
            if len(out.primal) != n or len(out.ray) != n:
                raise ShapeMismatch("certificate length does not match the problem")
            x = _frac_vec(out.primal)
            d = _frac_vec(out.ray)
            if not _primal_feasible(lp, A, rel, b, x):
                return False
            for j in range(n):
                if lp.lower[j] is not None and d[j] < 0:
                    return False
            if not all(_holds(_dot(A[i], d), rel[i], Fraction(0)) for i in range(m)):
                return False
            sgn = 1 if lp.sense == "min" else -1
            return sgn * _dot(lp.objective, d) < 0
    except TypeError:
        raise ShapeMismatch("certificate missing for the reported status")
    return False


def feasibility(A, b, rel=None, lower=None) -> LPProblem:
    """Zero-objective problem ``A x (rel) b, x >= 0``."""
    A = list(A)
    n = len(A[0]) if A else 0
    if rel is None:
        rel = [EQ] * len(A)
    return LPProblem.build([0] * n, A, rel, b, lower=lower)
