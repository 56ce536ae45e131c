"""Single-copy free operations and the ordering they induce.

Every deterministic free operation is a :class:`LocalWiring`: each party maps
its new input to an old one, measures, and post-processes the outcome with a
function that may depend on the new input. Relabelings, output coarse
grainings, input substitutions, input shortenings and input largenings are
all wirings; output unfolding is not (it splits an outcome at random) and has
its own function.

Party arguments accept ``"A"``/``"B"`` (or 0/1). Labels are 0-based.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import ratlp
from .core import ZERO, Behaviour, Setting, from_scaled, mix, validate
from .errors import (
    BadProbability,
    BadRepresentative,
    BadSource,
    CapExceeded,
    EmptyInputs,
    NotBijective,
    OutOfAlphabet,
    SameOutput,
    SettingMismatch,
)
from .localset import DEFAULT_VERTEX_CAP, DeterministicPoint, scale_to_int, sweep, vertex_table
from .ratlp import to_fraction

DEFAULT_WIRING_CAP = 10**5

_WIRING_CACHE: dict = {}


def _party(party) -> int:
    if party in (0, "A", "a", "alice", "Alice"):
        return 0
    if party in (1, "B", "b", "bob", "Bob"):
        return 1
    raise ValueError(f"party must be 'A' or 'B', not {party!r}")


def _is_perm(seq, n) -> bool:
    return sorted(seq) == list(range(n))


@dataclass(frozen=True)
class LocalWiring:
    """``P'(ab|xy) = sum P(a'b'|gA[x], gB[y])`` over ``hA[x][a'] = a``, ``hB[y][b'] = b``.

    ``gA`` has one entry per *target* Alice input; ``hA[x]`` maps source
    outputs to target outputs.
    """

    source: Setting
    target: Setting
    gA: tuple
    hA: tuple
    gB: tuple
    hB: tuple

    def __post_init__(self):
        s, t = self.source, self.target
        if len(self.gA) != t.mA or len(self.gB) != t.mB:
            raise OutOfAlphabet("input maps need one entry per target input")
        if len(self.hA) != t.mA or len(self.hB) != t.mB:
            raise OutOfAlphabet("output maps need one entry per target input")
        if any(not 0 <= v < s.mA for v in self.gA) or any(not 0 <= v < s.mB for v in self.gB):
            raise OutOfAlphabet("input map leaves the source alphabet")
        for h, ds, dt in [(h, s.dA, t.dA) for h in self.hA] + [(h, s.dB, t.dB) for h in self.hB]:
            if len(h) != ds or any(not 0 <= v < dt for v in h):
                raise OutOfAlphabet("output map has the wrong shape")

    @classmethod
    def identity(cls, setting: Setting) -> "LocalWiring":
        idA = tuple(range(setting.dA))
        idB = tuple(range(setting.dB))
        return cls(
            setting, setting,
            tuple(range(setting.mA)), (idA,) * setting.mA,
            tuple(range(setting.mB)), (idB,) * setting.mB,
        )

    @property
    def is_relabeling(self) -> bool:
        if self.source != self.target:
            return False
        s = self.source
        return (
            _is_perm(self.gA, s.mA)
            and _is_perm(self.gB, s.mB)
            and all(_is_perm(h, s.dA) for h in self.hA)
            and all(_is_perm(h, s.dB) for h in self.hB)
        )

    def index_maps(self):
        """Flat ``(src, tgt)`` arrays: target entry ``tgt[k]`` receives source entry ``src[k]``."""
        return _index_maps(self)

    def then(self, other: "LocalWiring") -> "LocalWiring":
        """The wiring that applies ``self`` first and ``other`` second."""
        return compose(other, self)

    def to_json(self) -> dict:
        return {
            "gA": [v + 1 for v in self.gA],
            "hA": [[v + 1 for v in h] for h in self.hA],
            "gB": [v + 1 for v in self.gB],
            "hB": [[v + 1 for v in h] for h in self.hB],
        }

    @classmethod
    def from_json(cls, obj, source: Setting) -> "LocalWiring":
        gA = tuple(v - 1 for v in obj["gA"])
        gB = tuple(v - 1 for v in obj["gB"])
        hA = tuple(tuple(v - 1 for v in h) for h in obj["hA"])
        hB = tuple(tuple(v - 1 for v in h) for h in obj["hB"])
        dA = max([source.dA] + [v + 1 for h in hA for v in h]) if "dA" not in obj else int(obj["dA"])
        dB = max([source.dB] + [v + 1 for h in hB for v in h]) if "dB" not in obj else int(obj["dB"])
        target = Setting(len(gA), len(gB), dA, dB)
        return cls(source, target, gA, hA, gB, hB)


@lru_cache(maxsize=8192)
def _index_maps(w: LocalWiring):
    s, t = w.source, w.target
    src, tgt = [], []
    for x, y in itertools.product(range(t.mA), range(t.mB)):
        x0, y0 = w.gA[x], w.gB[y]
        for a0, b0 in itertools.product(range(s.dA), range(s.dB)):
            src.append(s.index(a0, b0, x0, y0))
            tgt.append(t.index(w.hA[x][a0], w.hB[y][b0], x, y))
    return np.array(src, dtype=np.int64), np.array(tgt, dtype=np.int64)


def compose(second: LocalWiring, first: LocalWiring) -> LocalWiring:
    """``second o first``: apply ``first``, then ``second``."""
    if first.target != second.source:
        raise SettingMismatch(f"cannot compose {first.target} into {second.source}")
    gA = tuple(first.gA[v] for v in second.gA)
    gB = tuple(first.gB[v] for v in second.gB)
    hA = tuple(tuple(second.hA[x][first.hA[second.gA[x]][a]] for a in range(first.source.dA))
               for x in range(second.target.mA))
    hB = tuple(tuple(second.hB[y][first.hB[second.gB[y]][b]] for b in range(first.source.dB))
               for y in range(second.target.mB))
    return LocalWiring(first.source, second.target, gA, hA, gB, hB)


def apply_wiring(w: LocalWiring, p: Behaviour) -> Behaviour:
    if p.setting != w.source:
        raise SettingMismatch(f"wiring acts on {w.source}, behaviour is {p.setting}")
    src, tgt = w.index_maps()
    flat = np.array(p.flat, dtype=object)
    out = np.full(w.target.size, ZERO, dtype=object)
    np.add.at(out, tgt, flat[src])
    return validate(out.reshape(w.target.shape), w.target)


def apply_many(wirings: Sequence[LocalWiring], p: Behaviour):
    """Integer numerators of ``O(p)`` for every wiring, stacked; plus the denominator."""
    nums, den = p.scaled
    target = wirings[0].target
    out = np.zeros((len(wirings), target.size), dtype=nums.dtype)
    src = np.stack([w.index_maps()[0] for w in wirings])
    tgt = np.stack([w.index_maps()[1] for w in wirings])
    rows = np.repeat(np.arange(len(wirings)), src.shape[1]).reshape(src.shape)
    np.add.at(out, (rows, tgt), nums[src])
    return out, den


# -- parties ---------------------------------------------------------------

def swap_parties(p: Behaviour) -> Behaviour:
    s = p.setting
    return Behaviour(Setting(s.mB, s.mA, s.dB, s.dA), p.table.transpose(1, 0, 3, 2).copy())


def _on_alice(p, party, fn):
    if _party(party) == 0:
        return fn(p)
    return swap_parties(fn(swap_parties(p)))


def _one_party_wiring(setting: Setting, party, g, h, target: Optional[Setting] = None) -> LocalWiring:
    """Wiring acting as ``(g, h)`` on one party and as the identity on the other."""
    ident = LocalWiring.identity(setting)
    g, h = tuple(g), tuple(tuple(v) for v in h)
    if _party(party) == 0:
        dA = max([v + 1 for hx in h for v in hx] + [setting.dA]) if target is None else target.dA
        tgt = target or Setting(len(g), setting.mB, dA, setting.dB)
        return LocalWiring(setting, tgt, g, h, ident.gB, ident.hB)
    dB = max([v + 1 for hx in h for v in hx] + [setting.dB]) if target is None else target.dB
    tgt = target or Setting(setting.mA, len(g), setting.dA, dB)
    return LocalWiring(setting, tgt, ident.gA, ident.hA, g, h)


# -- relabelings -----------------------------------------------------------

def relabel(p: Behaviour, piA_in, piB_in, piA_out, piB_out) -> Behaviour:
    """``P'(ab|xy) = P(piA_out[x][a], piB_out[y][b] | piA_in[x], piB_in[y])``."""
    s = p.setting
    checks = [(piA_in, s.mA), (piB_in, s.mB)]
    checks += [(pi, s.dA) for pi in piA_out] + [(pi, s.dB) for pi in piB_out]
    if len(piA_out) != s.mA or len(piB_out) != s.mB or not all(_is_perm(pi, n) for pi, n in checks):
        raise NotBijective("relabelings need a permutation of every alphabet")
    t = np.empty(s.shape, dtype=object)
    for x, y in itertools.product(range(s.mA), range(s.mB)):
        block = p.table[piA_in[x], piB_in[y]]
        t[x, y] = block[np.ix_(list(piA_out[x]), list(piB_out[y]))]
    return Behaviour(s, t)


def relabeling_wiring(setting: Setting, piA_in, piB_in, piA_out, piB_out) -> LocalWiring:
    def inv(pi):
        out = [0] * len(pi)
        for i, v in enumerate(pi):
            out[v] = i
        return tuple(out)

    return LocalWiring(
        setting, setting,
        tuple(piA_in), tuple(inv(pi) for pi in piA_out),
        tuple(piB_in), tuple(inv(pi) for pi in piB_out),
    )


def _party_relabelings(m, d):
    perms_in = list(itertools.permutations(range(m)))
    perms_out = list(itertools.permutations(range(d)))
    return [(g, h) for g in perms_in for h in itertools.product(perms_out, repeat=m)]


def enumerate_relabelings(setting: Setting) -> list[LocalWiring]:
    """All relabelings as wirings, identity first."""
    ident = LocalWiring.identity(setting)
    out = [ident]
    for (gA, hA), (gB, hB) in itertools.product(
        _party_relabelings(setting.mA, setting.dA), _party_relabelings(setting.mB, setting.dB)
    ):
        w = LocalWiring(setting, setting, gA, hA, gB, hB)
        if w != ident:
            out.append(w)
    return out


# -- output operations -----------------------------------------------------

def _coarse_alice(p: Behaviour, sets, reps) -> Behaviour:
    s = p.setting
    t = p.table.copy()
    for x in range(s.mA):
        S = sorted(set(sets[x] or ()))
        if not S:
            continue
        r = reps[x]
        if r not in S:
            raise BadRepresentative(f"representative {r} not in {S} for input {x}")
        if any(not 0 <= a < s.dA for a in S):
            raise OutOfAlphabet(f"{S} leaves the output alphabet")
        merged = sum((p.table[x, :, a, :] for a in S), np.full((s.mB, s.dB), ZERO, dtype=object))
        for a in S:
            t[x, :, a, :] = ZERO
        t[x, :, r, :] = merged
    return Behaviour(s, t)


def coarse_grain(p: Behaviour, party, sets, reps) -> Behaviour:
    """Merge the outputs in ``sets[x]`` into ``reps[x]`` for every input ``x``.

    ``sets[x]`` may be empty (or None) to leave input ``x`` untouched.
    """
    n_in = p.setting.mA if _party(party) == 0 else p.setting.mB
    if len(sets) != n_in or len(reps) != n_in:
        raise OutOfAlphabet("need one set and one representative per input")
    return _on_alice(p, party, lambda q: _coarse_alice(q, sets, reps))


def coarse_grain_wiring(setting: Setting, party, sets, reps) -> LocalWiring:
    m, d = (setting.mA, setting.dA) if _party(party) == 0 else (setting.mB, setting.dB)
    h = []
    for x in range(m):
        S = set(sets[x] or ())
        if S and reps[x] not in S:
            raise BadRepresentative(f"representative {reps[x]} not in {sorted(S)}")
        h.append(tuple(reps[x] if a in S else a for a in range(d)))
    return _one_party_wiring(setting, party, range(m), h, setting)


def merge_outputs(p: Behaviour, party, x, a_from, a_into) -> Behaviour:
    """Elementary coarse graining: output ``a_from`` becomes ``a_into`` at input ``x``."""
    m = p.setting.mA if _party(party) == 0 else p.setting.mB
    sets = [None] * m
    reps = [None] * m
    sets[x] = {a_from, a_into}
    reps[x] = a_into
    return coarse_grain(p, party, sets, reps)


def _unfold_alice(p: Behaviour, x, a, q) -> Behaviour:
    s = p.setting
    target = Setting(s.mA, s.mB, s.dA + 1, s.dB)
    t = np.full(target.shape, ZERO, dtype=object)
    t[:, :, : s.dA, :] = p.table
    t[x, :, a, :] = q * p.table[x, :, a, :]
    t[x, :, s.dA, :] = (1 - q) * p.table[x, :, a, :]
    return Behaviour(target, t)


def unfold_output(p: Behaviour, party, x, a, q) -> Behaviour:
    """Split output ``a`` at input ``x``: keep it with probability ``q``, else
    report a new last output. The result has one more output for ``party``."""
    q = to_fraction(q)
    if not 0 <= q <= 1:
        raise BadProbability(f"q={q} outside [0, 1]")
    m, d = (p.setting.mA, p.setting.dA) if _party(party) == 0 else (p.setting.mB, p.setting.dB)
    if not (0 <= x < m and 0 <= a < d):
        raise OutOfAlphabet(f"(x={x}, a={a}) outside {p.setting}")
    return _on_alice(p, party, lambda r: _unfold_alice(r, x, a, q))


def partial_merge(p: Behaviour, party, x, a1, a2, q) -> Behaviour:
    """Report ``a2`` as ``a1`` with probability ``q`` at input ``x``."""
    if a1 == a2:
        raise SameOutput(f"outputs {a1} and {a2} coincide")
    q = to_fraction(q)
    if not 0 <= q <= 1:
        raise BadProbability(f"q={q} outside [0, 1]")
    merged = merge_outputs(p, party, x, a2, a1)
    if q == 0:
        return p
    if q == 1:
        return merged
    return mix([(1 - q, p), (q, merged)])


# -- input operations ------------------------------------------------------

def substitute_input(p: Behaviour, party, x1, x2) -> Behaviour:
    """Input ``x2`` now measures ``x1``."""
    return _on_alice(p, party, lambda r: _substitute_alice(r, x1, x2))


def _substitute_alice(p, x1, x2):
    s = p.setting
    if not (0 <= x1 < s.mA and 0 <= x2 < s.mA):
        raise OutOfAlphabet(f"inputs {x1}, {x2} outside {s}")
    t = p.table.copy()
    t[x2] = p.table[x1]
    return Behaviour(s, t)


def substitution_wiring(setting: Setting, party, x1, x2) -> LocalWiring:
    m, d = (setting.mA, setting.dA) if _party(party) == 0 else (setting.mB, setting.dB)
    g = [x1 if x == x2 else x for x in range(m)]
    return _one_party_wiring(setting, party, g, [tuple(range(d))] * m, setting)


def shorten_input(p: Behaviour, party, drop) -> Behaviour:
    """Remove the inputs in ``drop``."""
    drop = set(drop)
    m = p.setting.mA if _party(party) == 0 else p.setting.mB
    keep = [x for x in range(m) if x not in drop]
    if not keep:
        raise EmptyInputs("at least one input must remain")
    if any(not 0 <= x < m for x in drop):
        raise OutOfAlphabet(f"{sorted(drop)} outside the input alphabet")

    def cut(r):
        s = r.setting
        return Behaviour(Setting(len(keep), s.mB, s.dA, s.dB), r.table[keep].copy())

    return _on_alice(p, party, cut)


def shortening_wiring(setting: Setting, party, drop) -> LocalWiring:
    m, d = (setting.mA, setting.dA) if _party(party) == 0 else (setting.mB, setting.dB)
    keep = [x for x in range(m) if x not in set(drop)]
    if not keep:
        raise EmptyInputs("at least one input must remain")
    return _one_party_wiring(setting, party, keep, [tuple(range(d))] * len(keep))


def enlarge_input(p: Behaviour, party, mode: str, values) -> Behaviour:
    """Append inputs.

    ``mode="uncorrelated"``: each value is the deterministic output of a new
    input, ``P'(ab|x_new y) = P(b|y) [a = value]``.
    ``mode="correlated"``: each value is a source input whose rows are copied.
    """
    if isinstance(values, int):
        values = [values]
    values = list(values)
    if mode not in ("uncorrelated", "correlated"):
        raise BadSource(f"mode must be 'uncorrelated' or 'correlated', not {mode!r}")

    def grow(r):
        s = r.setting
        target = Setting(s.mA + len(values), s.mB, s.dA, s.dB)
        t = np.full(target.shape, ZERO, dtype=object)
        t[: s.mA] = r.table
        pb = r.bob_marginal()
        for k, v in enumerate(values):
            xn = s.mA + k
            if mode == "correlated":
                if not 0 <= v < s.mA:
                    raise BadSource(f"source input {v} outside {s}")
                t[xn] = r.table[v]
            else:
                if not 0 <= v < s.dA:
                    raise BadSource(f"output {v} outside {s}")
                t[xn, :, v, :] = pb
        return Behaviour(target, t)

    return _on_alice(p, party, grow)


def enlargement_wiring(setting: Setting, party, mode: str, values) -> LocalWiring:
    if isinstance(values, int):
        values = [values]
    m, d = (setting.mA, setting.dA) if _party(party) == 0 else (setting.mB, setting.dB)
    g = list(range(m))
    h = [tuple(range(d))] * m
    for v in values:
        if mode == "correlated":
            g.append(v)
            h.append(tuple(range(d)))
        else:
            g.append(0)
            h.append((v,) * d)
    return _one_party_wiring(setting, party, g, h)


# -- the monoid of same-setting wirings ------------------------------------

def _party_wirings(m, d):
    gs = itertools.product(range(m), repeat=m)
    return [(g, h) for g in gs for h in itertools.product(itertools.product(range(d), repeat=d), repeat=m)]


def wiring_count(setting: Setting) -> int:
    mA, mB, dA, dB = setting.shape
    return mA**mA * dA ** (dA * mA) * mB**mB * dB ** (dB * mB)


def enumerate_wirings(setting: Setting, cap: int = DEFAULT_WIRING_CAP) -> list[LocalWiring]:
    """Every same-setting wiring, identity first, then lexicographic in
    ``(gA, hA, gB, hB)``."""
    n = wiring_count(setting)
    if n > cap:
        raise CapExceeded(f"wirings of {setting}", n, cap)
    if setting in _WIRING_CACHE:
        return list(_WIRING_CACHE[setting])
    ident = LocalWiring.identity(setting)
    out = [ident]
    for (gA, hA), (gB, hB) in itertools.product(
        _party_wirings(setting.mA, setting.dA), _party_wirings(setting.mB, setting.dB)
    ):
        w = LocalWiring(setting, setting, gA, hA, gB, hB)
        if w != ident:
            out.append(w)
    _WIRING_CACHE[setting] = tuple(out)
    return out


def seed_wirings(setting: Setting, wirings):
    """Install an enumeration loaded from elsewhere (the on-disk cache)."""
    _WIRING_CACHE[setting] = tuple(wirings)


def generators(setting: Setting) -> list[LocalWiring]:
    """Relabelings, elementary output merges and input substitutions."""
    gens = set(enumerate_relabelings(setting))
    for party, m, d in ((0, setting.mA, setting.dA), (1, setting.mB, setting.dB)):
        for x in range(m):
            for a_from, a_into in itertools.permutations(range(d), 2):
                sets = [None] * m
                reps = [None] * m
                sets[x] = {a_from, a_into}
                reps[x] = a_into
                gens.add(coarse_grain_wiring(setting, party, sets, reps))
        for x1, x2 in itertools.permutations(range(m), 2):
            gens.add(substitution_wiring(setting, party, x1, x2))
    return sorted(gens, key=lambda w: (w.gA, w.hA, w.gB, w.hB))


def generated_monoid(setting: Setting, gens: Optional[Sequence[LocalWiring]] = None) -> set:
    """Breadth-first closure of the generators under composition."""
    gens = list(gens or generators(setting))
    start = LocalWiring.identity(setting)
    seen = {start}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        for g in gens:
            nxt = compose(g, w)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


# -- the ordering ----------------------------------------------------------

@dataclass
class OrderingVerdict:
    """Outcome of ``p1 > p2``: a mixing witness or a separating functional.

    On success ``local_weights`` (over deterministic points) and
    ``wiring_weights`` (over wirings applied to ``p1``) reproduce ``p2``. On
    failure ``farkas = (s, t)`` with ``s . c <= t`` for every vertex and every
    ``O(p1)`` while ``s . p2 > t``.
    """

    holds: bool
    local_weights: Optional[dict] = None
    wiring_weights: Optional[dict] = None
    farkas: Optional[tuple] = None

    def reconstruct(self, p1: Behaviour) -> np.ndarray:
        acc = np.full(p1.setting.shape, ZERO, dtype=object)
        for d, w in self.local_weights.items():
            acc = acc + w * d.behaviour().table
        for o, w in self.wiring_weights.items():
            acc = acc + w * apply_wiring(o, p1).table
        return acc

    def verify(self, p1: Behaviour, p2: Behaviour, cap: int = DEFAULT_WIRING_CAP) -> bool:
        """Exact re-check against every vertex and every enumerated wiring."""
        if self.holds:
            weights = list(self.local_weights.values()) + list(self.wiring_weights.values())
            if any(w < 0 for w in weights) or sum(weights, ZERO) != 1:
                return False
            return tuple(self.reconstruct(p1).reshape(-1)) == p2.flat
        s, t = self.farkas
        if sum((a * b for a, b in zip(s, p2.flat)), ZERO) <= t:
            return False
        if max(sweep(vertex_table(p1.setting).matrix, s)) > t:
            return False
        images, den = apply_many(enumerate_wirings(p1.setting, cap), p1)
        snum, sden = scale_to_int(s)
        vals = images.astype(object) @ snum.astype(object)
        return max(Fraction(int(v), den * sden) for v in vals) <= t


def compare(p1: Behaviour, p2: Behaviour, cap: int = DEFAULT_WIRING_CAP,
            vertex_cap: int = DEFAULT_VERTEX_CAP) -> OrderingVerdict:
    """Decide ``p2 = sum_j p_j d_j + sum_i q_i O_i(p1)`` with convex weights."""
    if p1.setting != p2.setting:
        raise SettingMismatch(f"{p1.setting} vs {p2.setting}")
    setting = p1.setting
    wirings = enumerate_wirings(setting, cap)
    vt = vertex_table(setting, vertex_cap)
    images, den = apply_many(wirings, p1)
    # distinct images only; vertices are columns of their own
    seen = {tuple(int(v) * den for v in row) for row in vt.matrix}
    cols_w = []
    for i, row in enumerate(images.tolist()):
        key = tuple(row)
        if key not in seen:
            seen.add(key)
            cols_w.append(i)
    nv = len(vt)
    ncol = nv + len(cols_w)
    A = np.empty((setting.size + 1, ncol), dtype=object)
    A[: setting.size, :nv] = [[Fraction(int(v)) for v in row] for row in vt.matrix.T]
    for k, i in enumerate(cols_w):
        A[: setting.size, nv + k] = [Fraction(int(v), den) for v in images[i]]
    A[setting.size, :] = Fraction(1)
    b = list(p2.flat) + [Fraction(1)]
    lp = ratlp.LPProblem.build([0] * ncol, A.tolist(), [ratlp.EQ] * len(b), b)
    out = ratlp.solve(lp)
    if out.status == ratlp.OPTIMAL:
        x = out.primal
        local = {vt.point(j): x[j] for j in range(nv) if x[j]}
        wired = {wirings[i]: x[nv + k] for k, i in enumerate(cols_w) if x[nv + k]}
        return OrderingVerdict(True, local, wired)
    y = out.farkas
    s = tuple(-v for v in y[:-1])
    return OrderingVerdict(False, farkas=(s, y[-1]))


def equally_nonlocal(p1: Behaviour, p2: Behaviour, cap: int = DEFAULT_WIRING_CAP) -> bool:
    return compare(p1, p2, cap).holds and compare(p2, p1, cap).holds
