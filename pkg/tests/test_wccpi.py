import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nsbox.core import Setting, deterministic_point, isotropic, mix, pr_box, uniform
from nsbox.errors import (
    BadProbability,
    BadRepresentative,
    BadSource,
    CapExceeded,
    EmptyInputs,
    NotBijective,
    SameOutput,
    SettingMismatch,
)
from nsbox.localset import chsh_functional, is_local
from nsbox.sampling import random_behaviour, random_local, random_wiring
from nsbox.wccpi import (
    LocalWiring,
    apply_wiring,
    coarse_grain,
    coarse_grain_wiring,
    compare,
    compose,
    enlarge_input,
    enlargement_wiring,
    enumerate_relabelings,
    enumerate_wirings,
    equally_nonlocal,
    generated_monoid,
    merge_outputs,
    partial_merge,
    relabel,
    relabeling_wiring,
    shorten_input,
    shortening_wiring,
    substitute_input,
    substitution_wiring,
    unfold_output,
    wiring_count,
)

S2222 = Setting(2, 2, 2, 2)
S2233 = Setting(2, 2, 3, 3)
HALF = Fraction(1, 2)


def _correlator(p, x, y):
    return p[0, 0, x, y] + p[1, 1, x, y] - p[0, 1, x, y] - p[1, 0, x, y]


def test_identity_wiring(pr):
    assert apply_wiring(LocalWiring.identity(S2222), pr) == pr
    with pytest.raises(SettingMismatch):
        apply_wiring(LocalWiring.identity(S2233), pr)


def test_merge_three_into_one_on_pr3(pr3):
    sets = [{0, 2}, {0, 2}]
    direct = coarse_grain(coarse_grain(pr3, "A", sets, [0, 0]), "B", sets, [0, 0])
    w = compose(coarse_grain_wiring(S2233, "B", sets, [0, 0]), coarse_grain_wiring(S2233, "A", sets, [0, 0]))
    assert apply_wiring(w, pr3) == direct
    # the CHSH value (S = 2 scale) rises to 10/3
    assert chsh_functional(S2233).value(direct) == Fraction(10, 3)


def test_substitution_on_pr_is_local(pr):
    assert is_local(substitute_input(pr, "A", 0, 1)).is_local
    assert substitute_input(pr, "A", 1, 1) == pr
    d = deterministic_point(S2222, [0, 1], [1, 0])
    assert substitute_input(d, "B", 0, 1) == deterministic_point(S2222, [0, 1], [1, 1])


def test_relabel_flips_correlators(pr):
    r = relabel(pr, (0, 1), (0, 1), ((0, 1), (1, 0)), ((0, 1), (0, 1)))
    for y in range(2):
        assert _correlator(r, 1, y) == -_correlator(pr, 1, y)
        assert _correlator(r, 0, y) == _correlator(pr, 0, y)
    assert relabel(r, (0, 1), (0, 1), ((0, 1), (1, 0)), ((0, 1), (0, 1))) == pr
    with pytest.raises(NotBijective):
        relabel(pr, (0, 0), (0, 1), ((0, 1), (0, 1)), ((0, 1), (0, 1)))


def test_coarse_grain_cases(pr):
    assert coarse_grain(pr, "A", [{0}, {1}], [0, 1]) == pr
    merged = coarse_grain(pr, "A", [{0, 1}, {0, 1}], [1, 1])
    assert all(merged[1, b, x, y] == merged.bob_marginal()[y, b] for b in range(2) for x in range(2) for y in range(2))
    assert is_local(merged).is_local
    with pytest.raises(BadRepresentative):
        coarse_grain(pr, "A", [{0, 1}, None], [2, None])


def test_unfold_and_merge(pr):
    u = unfold_output(pr, "A", 0, 0, 1)
    assert u.setting == Setting(2, 2, 3, 2)
    assert all(v == 0 for v in u.table[:, :, 2, :].reshape(-1))
    h = unfold_output(pr, "A", 0, 0, HALF)
    assert h[0, 0, 0, 0] == Fraction(1, 4) and h[2, 0, 0, 0] == Fraction(1, 4)
    back = merge_outputs(h, "A", 0, 2, 0)
    assert back.table[:, :, :2, :].tolist() == pr.table.tolist()
    with pytest.raises(BadProbability):
        unfold_output(pr, "A", 0, 0, 2)


def test_unfold_then_merge_elsewhere_is_partial_merge(pr):
    # moving the unfolded share of output 1 onto output 2 equals a partial merge 1 -> 2
    q = Fraction(1, 3)
    u = merge_outputs(unfold_output(pr, "B", 1, 0, 1 - q), "B", 1, 2, 1)
    pm = partial_merge(pr, "B", 1, 1, 0, q)
    assert u.table[:, :, :, :2].tolist() == pm.table.tolist()


def test_partial_merge_edges(pr):
    assert partial_merge(pr, "A", 0, 0, 1, 0) == pr
    assert partial_merge(pr, "A", 0, 0, 1, 1) == merge_outputs(pr, "A", 0, 1, 0)
    loc = random_local(S2222, random.Random(5))
    assert is_local(partial_merge(loc, "A", 1, 0, 1, Fraction(1, 3))).is_local
    with pytest.raises(SameOutput):
        partial_merge(pr, "A", 0, 1, 1, HALF)


def test_shorten_and_enlarge(pr):
    assert shorten_input(pr, "A", []) == pr
    short = shorten_input(pr, "A", [1])
    assert short.setting == Setting(1, 2, 2, 2)
    assert is_local(short).is_local
    with pytest.raises(EmptyInputs):
        shorten_input(pr, "A", [0, 1])
    # shorten then correlated largening from the kept input = substitution, up to input order
    again = enlarge_input(shorten_input(pr, "A", [1]), "A", "correlated", [0])
    assert again == substitute_input(pr, "A", 0, 1)
    assert shorten_input(enlarge_input(pr, "B", "uncorrelated", [1]), "B", [2]) == pr
    big = enlarge_input(pr, "A", "correlated", [0])
    assert big.setting == Setting(3, 2, 2, 2)
    assert not is_local(big).is_local
    with pytest.raises(BadSource):
        enlarge_input(pr, "A", "correlated", [5])


def test_named_ops_match_their_wirings(pr3, rng):
    for _ in range(20):
        p = random_behaviour(S2233, rng)
        party = rng.choice("AB")
        sets = [rng.sample(range(3), 2), None]
        reps = [sets[0][0], None]
        assert coarse_grain(p, party, sets, reps) == apply_wiring(coarse_grain_wiring(S2233, party, sets, reps), p)
        assert substitute_input(p, party, 1, 0) == apply_wiring(substitution_wiring(S2233, party, 1, 0), p)
        assert shorten_input(p, party, [0]) == apply_wiring(shortening_wiring(S2233, party, [0]), p)
        for mode, vals in (("correlated", [1]), ("uncorrelated", [2])):
            assert enlarge_input(p, party, mode, vals) == apply_wiring(enlargement_wiring(S2233, party, mode, vals), p)
        piA = rng.sample(range(2), 2)
        outs = [tuple(rng.sample(range(3), 3)) for _ in range(4)]
        args = (piA, (1, 0), outs[:2], outs[2:])
        assert relabel(p, *args) == apply_wiring(relabeling_wiring(S2233, *args), p)


def test_wiring_json_roundtrip():
    w = random_wiring(S2233, random.Random(2))
    assert LocalWiring.from_json(w.to_json(), S2233) == w


@given(st.integers(0, 10**6))
def test_composition_matches_sequential_application(seed):
    rng = random.Random(seed)
    setting = rng.choice([S2222, S2233, Setting(3, 2, 2, 2)])
    w1, w2 = random_wiring(setting, rng), random_wiring(setting, rng)
    p = random_behaviour(setting, rng)
    assert apply_wiring(compose(w2, w1), p) == apply_wiring(w2, apply_wiring(w1, p))
    assert w1.then(w2) == compose(w2, w1)


@given(st.integers(0, 10**6))
def test_wirings_map_vertices_to_vertices(seed):
    rng = random.Random(seed)
    w = random_wiring(S2233, rng)
    f = [rng.randrange(3) for _ in range(2)]
    g = [rng.randrange(3) for _ in range(2)]
    out = apply_wiring(w, deterministic_point(S2233, f, g))
    assert sorted(set(out.flat)) == [0, 1]


def test_enumeration_counts():
    assert wiring_count(S2222) == 4096
    ws = enumerate_wirings(S2222)
    assert len(ws) == len(set(ws)) == 4096
    assert ws[0] == LocalWiring.identity(S2222)
    assert len(enumerate_wirings(Setting(1, 1, 1, 1))) == 1
    with pytest.raises(CapExceeded):
        enumerate_wirings(S2233, cap=1000)
    rel = enumerate_relabelings(S2222)
    assert len(rel) == 64 and all(w.is_relabeling for w in rel)


def test_closure_on_sample():
    rng = random.Random(0)
    ws = enumerate_wirings(S2222)
    members = set(ws)
    for _ in range(2000):
        assert compose(rng.choice(ws), rng.choice(ws)) in members


def test_compare_examples(pr, unif, rng):
    v = compare(pr, pr)
    assert v.holds and v.verify(pr, pr)
    loc = random_local(S2222, rng)
    v = compare(pr, loc)
    assert v.holds and v.verify(pr, loc)
    v = compare(unif, pr)
    assert not v.holds and v.verify(unif, pr)
    target = mix([(Fraction(3, 5), pr), (Fraction(2, 5), loc)])
    assert compare(pr, target).holds


def test_equally_nonlocal(pr, unif, rng):
    r = relabel(pr, (1, 0), (0, 1), ((1, 0), (0, 1)), ((0, 1), (0, 1)))
    assert equally_nonlocal(pr, r)
    assert not equally_nonlocal(pr, unif)
    d1 = deterministic_point(S2222, [0, 0], [0, 1])
    d2 = deterministic_point(S2222, [1, 0], [1, 1])
    assert equally_nonlocal(d1, d2)


def test_bfs_reaches_whole_monoid():
    assert generated_monoid(S2222) == set(enumerate_wirings(S2222))
