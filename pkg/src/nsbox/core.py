"""Settings, behaviours and the catalog of named behaviours.

A behaviour is stored as a read-only numpy object array of
:class:`~fractions.Fraction` with shape ``(mA, mB, dA, dB)``. Flattening it in
C order gives the canonical index

    idx = ((x*mB + y)*dA + a)*dB + b

so each ``(x, y)`` block is contiguous. Inside Python every label is 0-based;
JSON files and the CLI use 1-based labels.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadK,
    BadProbability,
    NegativeEntry,
    NotNormalized,
    OutOfAlphabet,
    SettingMismatch,
    ShapeMismatch,
    SignalingAtoB,
    SignalingBtoA,
    WeightSum,
)
from .ratlp import to_fraction

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True, order=True)
class Setting:
    """Input counts ``mA, mB`` and output counts ``dA, dB``."""

    mA: int
    mB: int
    dA: int
    dB: int

    def __post_init__(self):
        for name in ("mA", "mB", "dA", "dB"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @classmethod
    def parse(cls, text: str) -> "Setting":
        """Accept ``"2,2,3,3"`` or the compact ``"2233"`` form."""
        text = text.strip()
        parts = text.split(",") if "," in text else list(text)
        if len(parts) != 4:
            raise ValueError(f"cannot parse setting {text!r}; expected mA,mB,dA,dB")
        return cls(*(int(p) for p in parts))

    @property
    def shape(self):
        return (self.mA, self.mB, self.dA, self.dB)

    @property
    def size(self) -> int:
        return self.mA * self.mB * self.dA * self.dB

    @property
    def n_deterministic(self) -> int:
        return self.dA**self.mA * self.dB**self.mB

    def __str__(self):
        if max(self.shape) < 10:
            return "".join(map(str, self.shape))
        return ",".join(map(str, self.shape))

    def index(self, a, b, x, y) -> int:
        return ((x * self.mB + y) * self.dA + a) * self.dB + b


def _frac_array(values, shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    flat = arr.reshape(-1)
    for i, v in enumerate(np.asarray(values, dtype=object).reshape(-1)):
        flat[i] = to_fraction(v)
    return arr


class Behaviour:
    """A validated no-signaling table ``P(ab|xy)``. Immutable."""

    def __init__(self, setting: Setting, table: np.ndarray):
        # use validate(); this constructor trusts its input
        table.setflags(write=False)
        object.__setattr__(self, "setting", setting)
        object.__setattr__(self, "table", table)

    def __setattr__(self, key, value):
        raise AttributeError("Behaviour is immutable")

    @property
    def flat(self) -> tuple:
        return tuple(self.table.reshape(-1))

    def __getitem__(self, abxy):
        a, b, x, y = abxy
        return self.table[x, y, a, b]

    def __eq__(self, other):
        return (
            isinstance(other, Behaviour)
            and self.setting == other.setting
            and self.flat == other.flat
        )

    def __hash__(self):
        return hash((self.setting, self.flat))

    def __repr__(self):
        return f"Behaviour({self.setting}, support={self.support_size()})"

    def support_size(self) -> int:
        return sum(1 for v in self.flat if v)

    @cached_property
    def scaled(self) -> tuple[np.ndarray, int]:
        """Integer numerators over a common denominator, as ``(int64 or object array, den)``."""
        den = math.lcm(*(v.denominator for v in self.flat))
        nums = [v.numerator * (den // v.denominator) for v in self.flat]
        dtype = np.int64 if den < 2**53 else object
        return np.array(nums, dtype=dtype), den

    def alice_marginal(self) -> np.ndarray:
        """Array ``[x, a] -> P(a|x)``."""
        return self.table[:, 0].sum(axis=2)

    def bob_marginal(self) -> np.ndarray:
        """Array ``[y, b] -> P(b|y)``."""
        return self.table[0].sum(axis=1)

    def to_json(self) -> dict:
        s = self.setting
        return {"mA": s.mA, "mB": s.mB, "dA": s.dA, "dB": s.dB, "p": [str(v) for v in self.flat]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def validate(table, setting: Setting) -> Behaviour:
    """Check positivity, normalisation and no-signaling exactly.

    ``table`` is either a flat sequence in canonical order or an array of shape
    ``(mA, mB, dA, dB)``.
    """
    arr = np.asarray(table, dtype=object)
    if arr.size != setting.size:
        raise ShapeMismatch(f"table has {arr.size} entries, setting {setting} needs {setting.size}")
    t = _frac_array(arr, setting.shape)
    mA, mB, dA, dB = setting.shape
    for x, y, a, b in itertools.product(range(mA), range(mB), range(dA), range(dB)):
        if t[x, y, a, b] < 0:
            raise NegativeEntry((a, b, x, y), t[x, y, a, b])
    for x, y in itertools.product(range(mA), range(mB)):
        total = sum(t[x, y].reshape(-1), ZERO)
        if total != 1:
            raise NotNormalized(x, y, total)
    pa = t.sum(axis=3)  # [x, y, a]
    for x, a in itertools.product(range(mA), range(dA)):
        for y in range(1, mB):
            if pa[x, y, a] != pa[x, 0, a]:
                raise SignalingAtoB(a, x, 0, y)
    pb = t.sum(axis=2)  # [x, y, b]
    for y, b in itertools.product(range(mB), range(dB)):
        for x in range(1, mA):
            if pb[x, y, b] != pb[0, y, b]:
                raise SignalingBtoA(b, 0, x, y)
    return Behaviour(setting, t)


def from_json(obj) -> Behaviour:
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        setting = Setting(int(obj["mA"]), int(obj["mB"]), int(obj["dA"]), int(obj["dB"]))
        entries = obj["p"]
    except (KeyError, TypeError) as exc:
        raise ShapeMismatch(f"behaviour JSON needs mA, mB, dA, dB and p: {exc}") from None
    if not isinstance(entries, list):
        raise ShapeMismatch("behaviour JSON field p must be a flat list")
    try:
        values = [Fraction(v) if isinstance(v, str) else to_fraction(v) for v in entries]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise BadProbability(f"unreadable probability entry: {exc}") from None
    return validate(values, setting)


def marginals(p: Behaviour):
    """One-party marginals as dicts ``{(a, x): P(a|x)}`` and ``{(b, y): P(b|y)}``."""
    pa = p.alice_marginal()
    pb = p.bob_marginal()
    s = p.setting
    alice = {(a, x): pa[x, a] for x in range(s.mA) for a in range(s.dA)}
    bob = {(b, y): pb[y, b] for y in range(s.mB) for b in range(s.dB)}
    return alice, bob


def deterministic_point(setting: Setting, f: Sequence[int], g: Sequence[int]) -> Behaviour:
    """``P(ab|xy) = [a = f(x)][b = g(y)]``."""
    f, g = tuple(f), tuple(g)
    if len(f) != setting.mA or len(g) != setting.mB:
        raise OutOfAlphabet("f needs one value per Alice input and g one per Bob input")
    if any(not 0 <= v < setting.dA for v in f) or any(not 0 <= v < setting.dB for v in g):
        raise OutOfAlphabet(f"f={f}, g={g} leave the output alphabets of {setting}")
    t = np.full(setting.shape, ZERO, dtype=object)
    for x, y in itertools.product(range(setting.mA), range(setting.mB)):
        t[x, y, f[x], g[y]] = ONE
    return Behaviour(setting, t)


def uniform(setting: Setting) -> Behaviour:
    v = Fraction(1, setting.dA * setting.dB)
    return Behaviour(setting, np.full(setting.shape, v, dtype=object))


def pr_box(setting: Setting, k: int = 2) -> Behaviour:
    """The two-input extremal box with ``k`` outcomes, zero-padded into ``setting``.

    Non-zero entries, all ``1/k``: ``(a,a|1,1)``, ``(a,a|2,1)``, ``(a,a|1,2)``
    and ``(a,a+1 mod k|2,2)`` (1-based labels).
    """
    if setting.mA != 2 or setting.mB != 2:
        raise BadK(f"PR boxes need two inputs per party, setting is {setting}")
    if not 2 <= k <= min(setting.dA, setting.dB):
        raise BadK(f"k={k} must lie in 2..{min(setting.dA, setting.dB)}")
    t = np.full(setting.shape, ZERO, dtype=object)
    v = Fraction(1, k)
    for a in range(k):
        t[0, 0, a, a] = v
        t[1, 0, a, a] = v
        t[0, 1, a, a] = v
        t[1, 1, a, (a + 1) % k] = v
    return validate(t, setting)


def mix(terms: Iterable[tuple]) -> Behaviour:
    """Convex combination of ``[(weight, behaviour), ...]``."""
    terms = [(to_fraction(w), p) for w, p in terms]
    if not terms:
        raise WeightSum("empty mixture")
    if any(w < 0 for w, _ in terms):
        raise WeightSum("negative weight")
    total = sum((w for w, _ in terms), ZERO)
    if total != 1:
        raise WeightSum(f"weights sum to {total}")
    setting = terms[0][1].setting
    for _, p in terms:
        if p.setting != setting:
            raise SettingMismatch(f"cannot mix {setting} with {p.setting}")
    acc = np.full(setting.shape, ZERO, dtype=object)
    for w, p in terms:
        if w:
            acc = acc + w * p.table
    return Behaviour(setting, acc)


def isotropic(lam, setting: Setting | None = None, k: int = 2) -> Behaviour:
    """``lam * PR^(k) + (1 - lam) * uniform``."""
    setting = setting or Setting(2, 2, 2, 2)
    lam = to_fraction(lam)
    if not 0 <= lam <= 1:
        raise BadProbability(f"lambda={lam} outside [0, 1]")
    return mix([(lam, pr_box(setting, k)), (1 - lam, uniform(setting))])


def pad_outputs(p: Behaviour, dA: int, dB: int) -> Behaviour:
    """Embed ``p`` into a setting with more outputs; new outputs never occur."""
    s = p.setting
    if dA < s.dA or dB < s.dB:
        raise SettingMismatch("padding cannot remove outputs")
    target = Setting(s.mA, s.mB, dA, dB)
    t = np.full(target.shape, ZERO, dtype=object)
    t[:, :, : s.dA, : s.dB] = p.table
    return Behaviour(target, t)


def from_scaled(setting: Setting, nums, den: int) -> Behaviour:
    """Rebuild from integer numerators over ``den`` (trusted input)."""
    t = np.empty(setting.size, dtype=object)
    for i, v in enumerate(nums):
        t[i] = Fraction(int(v), den)
    return Behaviour(setting, t.reshape(setting.shape))


def parse_catalog(name: str, setting: Setting | None = None) -> Behaviour:
    """Named behaviours: ``uniform``, ``det:F/G``, ``pr:K``, ``isotropic:LAMBDA``.

    ``det`` takes comma-separated 1-based outputs, e.g. ``det:1,2/2,2``.
    """
    kind, _, arg = name.partition(":")
    if kind == "uniform":
        return uniform(setting or Setting(2, 2, 2, 2))
    if kind == "pr":
        k = int(arg or 2)
        return pr_box(setting or Setting(2, 2, k, k), k)
    if kind == "isotropic":
        return isotropic(Fraction(arg), setting)
    if kind == "det":
        fs, _, gs = arg.partition("/")
        f = [int(v) - 1 for v in fs.split(",")]
        g = [int(v) - 1 for v in gs.split(",")]
        if setting is None:
            setting = Setting(len(f), len(g), max(2, max(f) + 1), max(2, max(g) + 1))
        return deterministic_point(setting, f, g)
    raise ValueError(f"unknown catalog entry {name!r}")
