import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nsbox.core import Setting, deterministic_point, isotropic, mix, pr_box, uniform
from nsbox.errors import CapExceeded, NotLocal, NotViolating, SettingMismatch
from nsbox.localset import (
    BellFunctional,
    chsh_functional,
    enumerate_deterministic,
    is_local,
    local_decomposition,
    normalize_certificate,
    sweep,
    vertex_table,
)
from nsbox.sampling import random_behaviour, random_local
from nsbox.wccpi import coarse_grain

S2222 = Setting(2, 2, 2, 2)


@pytest.mark.parametrize("setting,count", [("2222", 16), ("2233", 81), ("1111", 1), ("3322", 64)])
def test_vertex_counts(setting, count):
    pts = enumerate_deterministic(Setting.parse(setting))
    assert len(pts) == count
    assert len(set(pts)) == count
    assert [d.index() for d in pts] == list(range(count))


def test_vertex_cap():
    with pytest.raises(CapExceeded) as exc:
        vertex_table(Setting(3, 3, 3, 3), cap=100)
    assert exc.value.count == 729


def test_deterministic_points_are_local_with_unit_weight():
    for d in enumerate_deterministic(S2222):
        v = is_local(d.behaviour())
        assert v.is_local
        assert v.weights == {d: 1}


def _check_certificate(p, verdict):
    assert not verdict.is_local
    f = verdict.functional
    vals = sweep(vertex_table(p.setting).matrix, f.s)
    assert max(vals) == f.S
    assert f.value(p) - f.S == verdict.violation > 0


def test_pr_certificate_in_chsh_scale():
    p = pr_box(S2222)
    v = is_local(p)
    _check_certificate(p, v)
    chsh_form = normalize_certificate(v.functional, p, mode="chsh")
    assert chsh_form.S == 2
    assert chsh_form.value(p) - chsh_form.S == 2


@pytest.mark.parametrize("certificate", ["strongest", "farkas"])
def test_pr_certificate_matches_chsh_up_to_affine_change(certificate):
    # violation over the spread of vertex values is invariant under rescaling
    # and under adding multiples of the normalisation constraints; CHSH gives 2/4
    p = pr_box(S2222)
    v = is_local(p, certificate=certificate)
    _check_certificate(p, v)
    vals = v.functional.vertex_values()
    assert v.violation / (max(vals) - min(vals)) == Fraction(1, 2)
    g = normalize_certificate(v.functional, p)
    assert g.S in (1, -1)
    assert g.value(p) - g.S == v.violation / abs(v.functional.S)


def test_isotropic_threshold():
    assert is_local(isotropic(Fraction(1, 2))).is_local
    for eps in (Fraction(1, 100), Fraction(1, 2**10)):
        p = isotropic(Fraction(1, 2) + eps)
        v = is_local(p)
        _check_certificate(p, v)


def test_local_decomposition_reconstructs():
    for p in (uniform(S2222), isotropic(Fraction(1, 2))):
        w = local_decomposition(p)
        assert sum(w.values()) == 1
        acc = sum((q * d.behaviour().table for d, q in w.items()), np.full(S2222.shape, Fraction(0), dtype=object))
        assert tuple(acc.reshape(-1)) == p.flat
    # basic solution: at most dim + 1 = 9 nonzero weights for the 8-dimensional 2222 polytope
    assert len(local_decomposition(isotropic(Fraction(1, 2)))) <= 9
    with pytest.raises(NotLocal):
        local_decomposition(pr_box(S2222))


def test_chsh_functional_bound_and_value():
    f = chsh_functional(S2222)
    assert f.local_bound() == 2
    assert f.value(pr_box(S2222)) == 4
    assert f.value(isotropic(Fraction(3, 4))) == 3


def test_normalize_rescales_chsh():
    p = pr_box(S2222)
    f = chsh_functional(S2222).scaled(3)
    g = normalize_certificate(f, p, mode="chsh")
    assert g.S == 2 and g.s == chsh_functional(S2222).s
    assert normalize_certificate(f, p).S == 1


def test_normalize_zero_and_negative_bounds():
    p = pr_box(S2222)
    chsh = chsh_functional(S2222)
    shifted = BellFunctional(S2222, tuple(v - Fraction(1, 2) for v in chsh.s), Fraction(0))
    # sum of p over all entries is 4, so subtracting 1/2 from every s shifts values by -2
    g = normalize_certificate(shifted, p)
    assert g.S == 0
    assert max(abs(v) for v in g.s) == 1
    assert g.value(p) > 0
    neg = BellFunctional(S2222, tuple(v - 1 for v in chsh.s), Fraction(-2))
    h = normalize_certificate(neg, p)
    assert h.S == -1 and h.value(p) > h.S
    with pytest.raises(NotViolating):
        normalize_certificate(chsh, uniform(S2222))


def test_functional_json_roundtrip():
    f = chsh_functional(S2222)
    assert BellFunctional.from_json(f.to_json()) == f
    with pytest.raises(SettingMismatch):
        BellFunctional.from_json({"s": ["1"], "S": "0"}, S2222)


@given(st.integers(0, 10**6))
def test_random_local_mixtures_are_local(seed):
    rng = random.Random(seed)
    setting = rng.choice([S2222, Setting(3, 2, 2, 2), Setting(2, 2, 3, 2)])
    p = random_local(setting, rng, terms=5)
    v = is_local(p)
    assert v.is_local
    assert tuple(v.reconstruct().reshape(-1)) == p.flat


@given(st.integers(0, 10**6))
def test_certificates_are_sound(seed):
    rng = random.Random(seed)
    p = random_behaviour(S2222, rng)
    v = is_local(p, certificate=rng.choice(["strongest", "farkas"]))
    if v.is_local:
        assert tuple(v.reconstruct().reshape(-1)) == p.flat
    else:
        _check_certificate(p, v)


@given(st.integers(0, 10**6))
def test_coarse_graining_keeps_local(seed):
    rng = random.Random(seed)
    setting = Setting(2, 2, 3, 3)
    p = random_local(setting, rng)
    sets = [rng.sample(range(3), 2) for _ in range(2)]
    reps = [s[0] for s in sets]
    assert is_local(coarse_grain(p, rng.choice("AB"), sets, reps)).is_local
