"""Randomised search for increases of a measure under free operations.

Each trial draws an operation from the enabled families, applies it to the
current behaviour (a fresh one is drawn every few trials) and compares the
measure before and after. Violations are collected with everything needed
to reproduce them; they are never raised.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from ..core import Behaviour, Setting, mix
from ..sampling import (
    random_behaviour,
    random_local,
    random_relabeling_args,
    random_weights,
    random_wiring,
)
from ..wccpi import (
    LocalWiring,
    apply_wiring,
    coarse_grain,
    enlarge_input,
    relabel,
    shorten_input,
    substitute_input,
    unfold_output,
)
from .bell import chsh
from .communication import comm_cost_avg, comm_cost_worst
from .content import epr2, robustness
from .detection import _local_at, eta_star
from .entropy import relative_entropy_nl
from .result import jsonable

SAME_SETTING_OPS = ("mix", "coarse_grain", "relabel", "substitute")
SETTING_CHANGING_OPS = ("unfold", "shorten", "enlarge_u", "enlarge_c")
ALL_OPS = SAME_SETTING_OPS + SETTING_CHANGING_OPS

SUITE_NEFF_PRECISION = Fraction(1, 2**10)
RELENT_GAP_TOL = 1e-9


# -- operations --------------------------------------------------------------

def _party_dims(p: Behaviour, party):
    s = p.setting
    return (s.mA, s.dA) if party == "A" else (s.mB, s.dB)


def _op_mix(p, rng):
    k = rng.randint(1, 2)
    wirings = [LocalWiring.identity(p.setting) if rng.random() < 0.3 else random_wiring(p.setting, rng)
               for _ in range(k)]
    with_local = rng.random() < 0.5
    weights = random_weights(rng, k + with_local)
    terms = [(w, apply_wiring(o, p)) for w, o in zip(weights, wirings)]
    desc = {"op": "mix", "wirings": wirings, "weights": weights[:k]}
    if with_local:
        L = random_local(p.setting, rng)
        terms.append((weights[-1], L))
        desc["local"] = L
        desc["local_weight"] = weights[-1]
    return mix(terms), desc


def _op_coarse_grain(p, rng):
    parties = rng.choice([("A",), ("B",), ("A", "B")])
    out = p
    steps = []
    for party in parties:
        m, d = _party_dims(p, party)
        if d < 2:
            continue
        sets, reps = [None] * m, [None] * m
        chosen = [x for x in range(m) if rng.random() < 0.6] or [rng.randrange(m)]
        for x in chosen:
            S = rng.sample(range(d), rng.randint(2, d))
            sets[x] = S
            reps[x] = rng.choice(S)
        out = coarse_grain(out, party, sets, reps)
        steps.append({"party": party, "sets": sets, "reps": reps})
    return out, {"op": "coarse_grain", "steps": steps}


def _op_relabel(p, rng):
    args = random_relabeling_args(p.setting, rng)
    names = ("piA_in", "piB_in", "piA_out", "piB_out")
    return relabel(p, *args), {"op": "relabel", **dict(zip(names, args))}


def _op_substitute(p, rng):
    party = rng.choice("AB")
    m, _ = _party_dims(p, party)
    x1, x2 = rng.sample(range(m), 2)
    return substitute_input(p, party, x1, x2), {"op": "substitute", "party": party, "x1": x1, "x2": x2}


def _op_unfold(p, rng):
    party = rng.choice("AB")
    m, d = _party_dims(p, party)
    x, a = rng.randrange(m), rng.randrange(d)
    q = Fraction(rng.randint(1, 7), 8)
    return unfold_output(p, party, x, a, q), {"op": "unfold", "party": party, "x": x, "a": a, "q": q}


def _op_shorten(p, rng):
    party = rng.choice("AB")
    m, _ = _party_dims(p, party)
    drop = [rng.randrange(m)]
    return shorten_input(p, party, drop), {"op": "shorten", "party": party, "drop": drop}


def _op_enlarge(mode):
    def op(p, rng):
        party = rng.choice("AB")
        m, d = _party_dims(p, party)
        values = [rng.randrange(m if mode == "correlated" else d)]
        name = "enlarge_c" if mode == "correlated" else "enlarge_u"
        return enlarge_input(p, party, mode, values), {"op": name, "party": party, "values": values}

    return op


OPERATIONS: dict[str, Callable] = {
    "mix": _op_mix,
    "coarse_grain": _op_coarse_grain,
    "relabel": _op_relabel,
    "substitute": _op_substitute,
    "unfold": _op_unfold,
    "shorten": _op_shorten,
    "enlarge_u": _op_enlarge("uncorrelated"),
    "enlarge_c": _op_enlarge("correlated"),
}


def _applicable(op: str, p: Behaviour) -> bool:
    s = p.setting
    if op in ("substitute", "shorten"):
        return max(s.mA, s.mB) >= 2
    return True


# -- measures ----------------------------------------------------------------

@dataclass(frozen=True)
class SuiteMeasure:
    """How to evaluate and compare one measure inside the suite."""

    name: str
    evaluate: Callable
    setting: Setting
    ops: tuple
    tolerance: float = 0
    same_setting_only: bool = False

    def value(self, result):
        return result.value

    def violated(self, before, after_p: Behaviour):
        after = self.evaluate(after_p)
        return after.value > before.value + self.tolerance, after


class _NeffMeasure(SuiteMeasure):
    """N_eff compared through a single exact probe.

    ``before`` certifies locality of the detector model at ``eta_lo``. If the
    transformed behaviour is nonlocal there, its threshold lies strictly
    below ``eta_lo`` and N_eff has increased. The after-bracket is then
    refined from the probe result for the report.
    """

    def violated(self, before, after_p):
        eta_lo = before.witness["eta_star"]
        if eta_lo < 1 and not _local_at(after_p, eta_lo, 10**6):
            return True, self.evaluate(after_p)
        return False, self.evaluate(after_p)


def _chsh(p):
    return chsh(p)


def _neff(p):
    return eta_star(p, SUITE_NEFF_PRECISION, nesting_checks=0)


def _relent(p):
    return relative_entropy_nl(p, gap_tol=RELENT_GAP_TOL)


SUITE_MEASURES = {
    "chsh": SuiteMeasure("chsh", _chsh, Setting(2, 2, 3, 3), SAME_SETTING_OPS, same_setting_only=True),
    "epr2": SuiteMeasure("epr2", epr2, Setting(2, 2, 2, 2), ALL_OPS),
    "robustness": SuiteMeasure("robustness", robustness, Setting(2, 2, 2, 2), ALL_OPS),
    "neff": _NeffMeasure("neff", _neff, Setting(2, 2, 2, 2), ALL_OPS),
    "comm_avg": SuiteMeasure("comm_avg", comm_cost_avg, Setting(2, 2, 2, 2), ALL_OPS),
    "comm_worst": SuiteMeasure("comm_worst", comm_cost_worst, Setting(2, 2, 2, 2), ALL_OPS),
    "relent": SuiteMeasure("relent", _relent, Setting(2, 2, 2, 2), ALL_OPS, tolerance=2 * RELENT_GAP_TOL),
}


# -- the suite ---------------------------------------------------------------

@dataclass
class SuiteReport:
    measure: str
    setting: Setting
    trials: int
    seed: int
    ops: tuple
    tolerance: float
    counts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    pairs: list = field(default_factory=list)  # (before, after, op)

    @property
    def violations_by_op(self) -> dict:
        out = {op: 0 for op in self.ops}
        for v in self.violations:
            out[v["op"]] += 1
        return out

    def to_json(self) -> dict:
        return {
            "measure": self.measure,
            "setting": str(self.setting),
            "trials": self.trials,
            "seed": self.seed,
            "ops": list(self.ops),
            "tolerance": repr(self.tolerance) if isinstance(self.tolerance, float) else str(self.tolerance),
            "counts": self.counts,
            "violations_by_op": self.violations_by_op,
            "violations": jsonable(self.violations),
            "pairs": [[str(b), str(a), op] for b, a, op in self.pairs],
        }


def monotonicity_suite(measure_id: str, trials: int, seed: int = 0,
                       ops: Optional[tuple] = None, setting: Optional[Setting] = None,
                       ops_per_behaviour: int = 4) -> SuiteReport:
    """Run ``trials`` (behaviour, operation) pairs and report every increase."""
    if measure_id not in SUITE_MEASURES:
        raise KeyError(f"unknown measure {measure_id!r}; choose from {sorted(SUITE_MEASURES)}")
    entry = SUITE_MEASURES[measure_id]
    setting = setting or entry.setting
    ops = tuple(ops or entry.ops)
    bad = [op for op in ops if op not in OPERATIONS]
    if bad:
        raise KeyError(f"unknown operations {bad}")
    if entry.same_setting_only:
        ops = tuple(op for op in ops if op in SAME_SETTING_OPS)
    rng = random.Random(seed)
    report = SuiteReport(measure_id, setting, trials, seed, ops, entry.tolerance,
                         counts={op: 0 for op in ops})
    p = before = None
    for trial in range(trials):
        if trial % ops_per_behaviour == 0:
            p = random_behaviour(setting, rng)
            before = entry.evaluate(p)
        candidates = [op for op in ops if _applicable(op, p)]
        op = rng.choice(candidates)
        after_p, desc = OPERATIONS[op](p, rng)
        hit, after = entry.violated(before, after_p)
        report.counts[op] += 1
        report.pairs.append((before.value, after.value, op))
        if hit:
            report.violations.append({
                "trial": trial,
                "op": op,
                "before": before.value,
                "after": after.value,
                "behaviour": p,
                "operation": desc,
                "result": after_p,
            })
    return report
