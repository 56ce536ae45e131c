"""Bell-violation measures: the best violation over relabelings or wirings."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from ..core import Behaviour
from ..errors import CapExceeded, SettingMismatch
from ..localset import BellFunctional, chsh_functional, scale_to_int
from ..wccpi import DEFAULT_WIRING_CAP, LocalWiring, _party_relabelings, _party_wirings
from .result import MeasureResult


def _alice_image(P: np.ndarray, gA, hA) -> np.ndarray:
    """``P'[x, y, a, b] = sum_{hA[x][a'] = a} P[gA[x], y, a', b]`` on integer tables."""
    out = np.zeros_like(P)
    for x, x0 in enumerate(gA):
        for a0, a in enumerate(hA[x]):
            out[x, :, a, :] += P[x0, :, a0, :]
    return out


def _bob_table(S: np.ndarray, PA: np.ndarray) -> np.ndarray:
    """``T[y, b, y0, b0] = sum_{x, a} S[x, y, a, b] PA[x, y0, a, b0]``."""
    return np.tensordot(S, PA, axes=([0, 2], [0, 2]))


def _best_bob_relabeling(T, G, H):
    """Values of every Bob relabeling (rows of ``G``/``H``); first argmax."""
    nB, mB = G.shape
    dB = H.shape[2]
    ys = np.arange(mB)[None, :, None]
    bs = np.arange(dB)[None, None, :]
    vals = T[ys, H, G[:, :, None], bs].sum(axis=(1, 2))
    k = int(np.argmax(vals))
    return vals[k], k


def _best_bob_wiring(T):
    """Best Bob wiring for a fixed Alice wiring, solved separately per input.

    ``T[y, b, y0, b0]``: Bob picks ``y0 = gB[y]`` and ``b = hB[y][b0]``. The
    lexicographically first optimum is taken so ties follow enumeration order.
    """
    per = T.max(axis=1)  # [y, y0, b0]
    arg = T.argmax(axis=1)
    score = per.sum(axis=2)  # [y, y0]
    gB = score.argmax(axis=1)
    ys = np.arange(T.shape[0])
    total = score[ys, gB].sum()
    hB = tuple(tuple(int(v) for v in arg[y, gB[y]]) for y in ys)
    return total, tuple(int(v) for v in gB), hB


def bell_value(p: Behaviour, functional: BellFunctional, mode: str = "relabelings",
               cap: int = DEFAULT_WIRING_CAP) -> MeasureResult:
    """``max(max_O s.O(p) - S, 0)`` over relabelings or over all same-setting wirings.

    The maximising operation is the witness; ties go to the first operation
    in enumeration order (identity first). In ``all_wirings`` mode Bob's best
    response is found in closed form and ``cap`` limits Alice's enumeration.
    """
    if functional.setting != p.setting:
        raise SettingMismatch(f"functional on {functional.setting}, behaviour on {p.setting}")
    st = p.setting
    s_int, s_den = scale_to_int(functional.s)
    p_int, p_den = p.scaled
    dtype = object if object in (s_int.dtype, p_int.dtype) else np.int64
    big = max(int(abs(s_int).max(initial=0)), 1) * max(int(abs(p_int).max(initial=0)), 1)
    if big * st.size >= 2**62:
        dtype = object
    S = s_int.astype(dtype).reshape(st.shape)
    P = p_int.astype(dtype).reshape(st.shape)
    ident = LocalWiring.identity(st)
    best = (S * P).sum()
    best_op = ident

    if mode == "relabelings":
        alice = _party_relabelings(st.mA, st.dA)
        bob = _party_relabelings(st.mB, st.dB)
        G = np.array([g for g, _ in bob], dtype=np.int64).reshape(len(bob), st.mB)
        H = np.array([h for _, h in bob], dtype=np.int64).reshape(len(bob), st.mB, st.dB)
        for gA, hA in alice:
            val, k = _best_bob_relabeling(_bob_table(S, _alice_image(P, gA, hA)), G, H)
            if val > best:
                best = val
                best_op = LocalWiring(st, st, gA, hA, bob[k][0], bob[k][1])
    elif mode == "all_wirings":
        n_alice = st.mA**st.mA * st.dA ** (st.dA * st.mA)
        if n_alice > cap:
            raise CapExceeded(f"Alice wirings of {st}", n_alice, cap)
        for gA, hA in _party_wirings(st.mA, st.dA):
            val, gB, hB = _best_bob_wiring(_bob_table(S, _alice_image(P, gA, hA)))
            if val > best:
                best = val
                best_op = LocalWiring(st, st, gA, hA, gB, hB)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    raw = Fraction(int(best), s_den * p_den)
    value = max(raw - functional.S, Fraction(0))
    return MeasureResult(
        f"bell:{mode}", value,
        {"operation": best_op, "functional_value": raw, "functional": functional},
    )


def chsh(p: Behaviour, mode: str = "relabelings", cap: int = DEFAULT_WIRING_CAP) -> MeasureResult:
    """CHSH violation above 2; outputs beyond the second carry the value 0."""
    res = bell_value(p, chsh_functional(p.setting), mode, cap)
    return MeasureResult("chsh", res.value, res.witness)
