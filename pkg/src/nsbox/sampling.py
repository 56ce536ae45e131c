"""Random exact behaviours and random free operations.

Behaviours are convex mixtures with small-integer rational weights over
deterministic points and relabelled, embedded PR boxes. The distribution is
cheap and exactly representable; it is not uniform on the no-signaling set.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import Behaviour, Setting, deterministic_point, mix, pad_outputs, pr_box
from .localset import is_local
from .wccpi import (
    LocalWiring,
    _party_relabelings,
    enlarge_input,
    relabel,
)


def random_weights(rng: random.Random, n: int, high: int = 12) -> list[Fraction]:
    raw = [rng.randint(1, high) for _ in range(n)]
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


def random_deterministic(setting: Setting, rng: random.Random) -> Behaviour:
    f = [rng.randrange(setting.dA) for _ in range(setting.mA)]
    g = [rng.randrange(setting.dB) for _ in range(setting.mB)]
    return deterministic_point(setting, f, g)


def random_relabeling_args(setting: Setting, rng: random.Random):
    gA, hA = rng.choice(_party_relabelings(setting.mA, setting.dA))
    gB, hB = rng.choice(_party_relabelings(setting.mB, setting.dB))
    return gA, gB, hA, hB


def random_relabel(p: Behaviour, rng: random.Random) -> Behaviour:
    return relabel(p, *random_relabeling_args(p.setting, rng))


def random_local(setting: Setting, rng: random.Random, terms: int = 3) -> Behaviour:
    pts = [random_deterministic(setting, rng) for _ in range(rng.randint(1, terms))]
    return mix(zip(random_weights(rng, len(pts)), pts))


def nonlocal_vertex(setting: Setting, rng: random.Random) -> Behaviour:
    """A relabelled PR box embedded into ``setting`` (needs >= 2 inputs and outputs each)."""
    if min(setting.shape) < 2:
        raise ValueError(f"no nonlocal behaviours in {setting}")
    k = rng.randint(2, min(setting.dA, setting.dB))
    p = pad_outputs(pr_box(Setting(2, 2, k, k), k), setting.dA, setting.dB)
    if setting.mA > 2:
        p = enlarge_input(p, "A", "correlated", [rng.randrange(2) for _ in range(setting.mA - 2)])
    if setting.mB > 2:
        p = enlarge_input(p, "B", "correlated", [rng.randrange(2) for _ in range(setting.mB - 2)])
    return random_relabel(p, rng)


def random_behaviour(setting: Setting, rng: random.Random, terms: int = 4,
                     nonlocal_share: float = 0.5) -> Behaviour:
    """Mixture of deterministic points and (with probability ``nonlocal_share``
    per term) nonlocal vertices."""
    can_nl = min(setting.shape) >= 2
    parts = []
    for _ in range(rng.randint(1, terms)):
        if can_nl and rng.random() < nonlocal_share:
            parts.append(nonlocal_vertex(setting, rng))
        else:
            parts.append(random_deterministic(setting, rng))
    return mix(zip(random_weights(rng, len(parts)), parts))


def random_nonlocal(setting: Setting, rng: random.Random, max_tries: int = 200) -> Behaviour:
    for _ in range(max_tries):
        parts = [nonlocal_vertex(setting, rng)]
        parts += [random_behaviour(setting, rng, terms=2) for _ in range(rng.randint(0, 2))]
        w = random_weights(rng, len(parts))
        # tilt towards the nonlocal vertex so most draws are nonlocal
        w = [w[0] + 1] + w[1:]
        total = sum(w)
        p = mix(zip([v / total for v in w], parts))
        if not is_local(p, certificate="farkas").is_local:
            return p
    raise RuntimeError("could not sample a nonlocal behaviour")


def random_wiring(setting: Setting, rng: random.Random) -> LocalWiring:
    mA, mB, dA, dB = setting.shape
    gA = tuple(rng.randrange(mA) for _ in range(mA))
    gB = tuple(rng.randrange(mB) for _ in range(mB))
    hA = tuple(tuple(rng.randrange(dA) for _ in range(dA)) for _ in range(mA))
    hB = tuple(tuple(rng.randrange(dB) for _ in range(dB)) for _ in range(mB))
    return LocalWiring(setting, setting, gA, hA, gB, hB)
