"""Detection-efficiency model and the threshold-efficiency measure."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..core import ZERO, Behaviour, Setting
from ..errors import BadProbability
from ..localset import DEFAULT_VERTEX_CAP, is_local
from ..ratlp import to_fraction
from ..wccpi import partial_merge, unfold_output
from .result import MeasureResult

DEFAULT_PRECISION = Fraction(1, 2**20)


def _check_eta(eta) -> Fraction:
    eta = to_fraction(eta)
    if not 0 <= eta <= 1:
        raise BadProbability(f"eta={eta} outside [0, 1]")
    return eta


def detector_model(p: Behaviour, eta) -> Behaviour:
    """Each detector clicks independently with probability ``eta``.

    A missing click is reported as one extra output, placed last for each
    party. Both miss with probability ``(1 - eta)**2``.
    """
    eta = _check_eta(eta)
    s = p.setting
    target = Setting(s.mA, s.mB, s.dA + 1, s.dB + 1)
    t = np.full(target.shape, ZERO, dtype=object)
    miss = 1 - eta
    t[:, :, : s.dA, : s.dB] = eta * eta * p.table
    t[:, :, : s.dA, s.dB] = eta * miss * p.table.sum(axis=3)
    t[:, :, s.dA, : s.dB] = eta * miss * p.table.sum(axis=2)
    t[:, :, s.dA, s.dB] = miss * miss
    return Behaviour(target, t)


def detector_model_by_operations(p: Behaviour, eta) -> Behaviour:
    """The same table built from output unfoldings and partial merges.

    Per party: unfold output 0 at input 0 with keep-probability ``eta``, then
    move a ``1 - eta`` share of every other (input, output) pair onto the new
    output.
    """
    eta = _check_eta(eta)
    out = p
    for party in ("A", "B"):
        m, d = (p.setting.mA, p.setting.dA) if party == "A" else (p.setting.mB, p.setting.dB)
        out = unfold_output(out, party, 0, 0, eta)
        for x in range(m):
            for a in range(d):
                if (x, a) != (0, 0):
                    out = partial_merge(out, party, x, d, a, 1 - eta)
    return out


def _local_at(p: Behaviour, eta, cap) -> bool:
    return is_local(detector_model(p, eta), cap, certificate="farkas").is_local


def eta_star(p: Behaviour, precision=DEFAULT_PRECISION, cap: int = DEFAULT_VERTEX_CAP,
             nesting_checks: int = 2) -> MeasureResult:
    """Threshold efficiency by dyadic bisection; value ``N_eff = 1 - eta_lo``.

    ``detector_model(p, eta_lo)`` is certified local and
    ``detector_model(p, eta_hi)`` nonlocal, with ``eta_hi - eta_lo <= precision``.
    The bracket on ``N_eff`` is ``(1 - eta_hi, 1 - eta_lo)``. A few extra
    probes outside the bracket confirm that locality is monotone in ``eta``.
    """
    precision = to_fraction(precision)
    if precision <= 0:
        raise ValueError("precision must be positive")
    if is_local(p, cap, certificate="farkas").is_local:
        one = Fraction(1)
        return MeasureResult("neff", Fraction(0), {"eta_star": one, "probes": []}, (Fraction(0), Fraction(0)))
    lo, hi = Fraction(0), Fraction(1)
    probes = []
    while hi - lo > precision:
        mid = (lo + hi) / 2
        local = _local_at(p, mid, cap)
        probes.append((mid, local))
        if local:
            lo = mid
        else:
            hi = mid
    extra = []
    for k in range(1, nesting_checks + 1):
        below = lo * (1 - Fraction(1, 2**k))
        above = hi + (1 - hi) * Fraction(1, 2**k)
        extra += [(below, _local_at(p, below, cap)), (above, _local_at(p, above, cap))]
    for eta_l, loc_l in probes + extra:
        for eta_n, loc_n in probes + extra:
            if loc_l and not loc_n and eta_l >= eta_n:
                raise RuntimeError(f"locality not monotone: local at {eta_l}, nonlocal at {eta_n}")
    witness = {"eta_star": lo, "eta_bracket": [lo, hi], "probes": [[e, v] for e, v in probes + extra]}
    return MeasureResult("neff", 1 - lo, witness, (1 - hi, 1 - lo))
