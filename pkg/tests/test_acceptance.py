"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line naming its criterion, then asserts
every sub-check. Run with ``pytest tests/test_acceptance.py -v`` and the lines
appear on the terminal even without ``-s``.
"""

import math
import random
from fractions import Fraction

import pytest

from nsbox.core import Setting, deterministic_point, mix, pr_box, uniform
from nsbox.localset import chsh_functional, enumerate_deterministic, is_local, sweep, vertex_table
from nsbox.measures import (
    bell_value,
    comm_cost_avg,
    comm_cost_worst,
    detector_model,
    epr2,
    eta_star,
    monotonicity_suite,
    relative_entropy_nl,
    robustness,
)
from nsbox.sampling import random_behaviour, random_local, random_nonlocal, random_wiring
from nsbox.wccpi import (
    LocalWiring,
    apply_wiring,
    coarse_grain,
    compare,
    compose,
    enumerate_wirings,
    generated_monoid,
    generators,
)

S2222 = Setting(2, 2, 2, 2)
S2233 = Setting(2, 2, 3, 3)
HALF = Fraction(1, 2)
TWO_THIRDS = Fraction(2, 3)
GAP_TOL = 1e-9


@pytest.fixture
def report(capsys):
    """Print one verdict line, then fail on the first unmet check."""

    def _report(number, title, checks):
        failed = [name for name, ok in checks if not ok]
        line = f"{'PASS' if not failed else 'FAIL'} criterion {number}: {title}"
        if failed:
            line += " (failed: " + ", ".join(failed) + ")"
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line

    return _report


def pr_noise(lam):
    return mix([(lam, pr_box(S2222)), (1 - lam, uniform(S2222))])


def test_criterion_1_locality_oracle(report):
    checks = []
    det_ok = True
    for d in enumerate_deterministic(S2222):
        v = is_local(d.behaviour())
        det_ok &= v.is_local and v.weights == {d: 1}
    checks.append(("16 deterministic points local with unit weight", det_ok and len(vertex_table(S2222)) == 16))
    v = is_local(pr_box(S2222))
    checks.append(("PR nonlocal", not v.is_local))
    func = v.functional
    bound_ok = all(val <= func.S for val in sweep(vertex_table(S2222).matrix, func.s))
    checks.append(("certificate bound holds on every vertex", bound_ok and func.value(pr_box(S2222)) > func.S))
    checks.append(("lambda = 1/2 local", is_local(pr_noise(HALF)).is_local))
    checks.append(("lambda = 1/2 + 2^-10 nonlocal", not is_local(pr_noise(HALF + Fraction(1, 2**10))).is_local))
    report(1, "locality oracle", checks)


def test_criterion_2_coarse_graining_counterexample(report):
    pr3 = pr_box(S2233, 3)
    f = chsh_functional(S2233)
    before = bell_value(pr3, f, "relabelings").value
    sets = [{0, 2}, {0, 2}]
    merged = coarse_grain(coarse_grain(pr3, "A", sets, [0, 0]), "B", sets, [0, 0])
    after = bell_value(merged, f, "relabelings").value
    report(2, "bell value 1/3 rises to 4/3 under coarse graining", [
        ("before = 1/3", before == Fraction(1, 3)),
        ("after = 4/3", after == Fraction(4, 3)),
    ])


def test_criterion_3_epr2(report):
    rng = random.Random(3)
    grid = [Fraction(k, 9) for k in range(10)]
    values = [epr2(pr_noise(lam)).value for lam in grid]
    report(3, "EPR2", [
        ("PR = 1", epr2(pr_box(S2222)).value == 1),
        ("local = 0", all(epr2(random_local(S2222, rng)).value == 0 for _ in range(10))),
        ("monotone on lambda grid", all(a <= b for a, b in zip(values, values[1:]))),
    ])


def test_criterion_4_robustness(report):
    rng = random.Random(4)
    pr = pr_box(S2222)
    r = robustness(pr)
    noisy = mix([(1 - r.value, pr), (r.value, r.witness["noise"])])
    report(4, "robustness", [
        ("PR = 1/3", r.value == Fraction(1, 3)),
        ("noise is local", is_local(r.witness["noise"]).is_local),
        ("witness mixture is local", is_local(noisy).is_local),
        ("local = 0", all(robustness(random_local(S2222, rng)).value == 0 for _ in range(10))),
    ])


def test_criterion_5_detection_efficiency(report):
    r = eta_star(pr_box(S2222), Fraction(1, 2**20))
    lo, hi = r.witness["eta_bracket"]
    rng = random.Random(5)
    samples = [random_nonlocal(S2222, rng) for _ in range(100)]
    # N_eff <= 1/3 means the detector model is already local at eta = 2/3
    bound_ok = all(is_local(detector_model(p, TWO_THIRDS)).is_local for p in samples)
    report(5, "detection efficiency", [
        ("bracket width <= 2^-20", hi - lo <= Fraction(1, 2**20)),
        ("bracket contains 2/3", lo <= TWO_THIRDS <= hi),
        ("N_eff <= 1/3 on 100 nonlocal samples", bound_ok),
    ])


def test_criterion_6_communication_cost(report):
    pr = pr_box(S2222)
    rng = random.Random(6)
    local = [random_local(S2222, rng) for _ in range(100)]
    nonlocal_ = [random_nonlocal(S2222, rng) for _ in range(100)]
    report(6, "communication cost", [
        ("avg(PR) = 1", comm_cost_avg(pr).value == 1),
        ("worst(PR) = 1", comm_cost_worst(pr).value == 1),
        ("zero on 100 local", all(comm_cost_avg(p).value == 0 and comm_cost_worst(p).value == 0 for p in local)),
        ("positive on 100 nonlocal",
         all(comm_cost_avg(p).value > 0 and comm_cost_worst(p).value > 0 for p in nonlocal_)),
    ])


def _free_image(p, rng):
    """A random element of the free orbit of ``p``: wirings mixed with local noise."""
    terms = [(Fraction(rng.randint(1, 5)), apply_wiring(random_wiring(S2222, rng), p))
             for _ in range(rng.randint(1, 3))]
    if rng.random() < 0.5:
        terms.append((Fraction(rng.randint(1, 5)), random_local(S2222, rng)))
    total = sum(w for w, _ in terms)
    return mix([(w / total, q) for w, q in terms])


def test_criterion_7_ordering(report):
    pr = pr_box(S2222)
    rng = random.Random(7)
    top_ok = True
    for _ in range(100):
        p = random_behaviour(S2222, rng)
        v = compare(pr, p)
        top_ok &= v.holds and v.verify(pr, p)
    v = compare(uniform(S2222), pr)
    refl_ok = trans_ok = True
    for _ in range(50):
        p1 = random_behaviour(S2222, rng)
        p2 = _free_image(p1, rng)
        p3 = _free_image(p2, rng)
        refl_ok &= compare(p1, p1).holds
        links = [compare(p1, p2), compare(p2, p3)]
        trans_ok &= all(link.holds for link in links) and compare(p1, p3).holds
    report(7, "ordering oracle", [
        ("PR above 100 samples", top_ok),
        ("uniform does not reach PR", not v.holds),
        ("Farkas certificate verified", v.verify(uniform(S2222), pr)),
        ("reflexive on 50 samples", refl_ok),
        ("transitive on 50 chains", trans_ok),
    ])


def test_criterion_8_wiring_monoid(report):
    ws = enumerate_wirings(S2222)
    members = set(ws)
    rng = random.Random(8)
    closed = all(compose(rng.choice(ws), rng.choice(ws)) in members for _ in range(5000))
    # every generator pair, both orders
    gens = generators(S2222)
    closed &= all(compose(a, b) in members for a in gens for b in gens)
    reached = generated_monoid(S2222)
    report(8, "wiring monoid", [
        ("4096 elements", len(ws) == 4096 and len(members) == 4096),
        ("identity first", ws[0] == LocalWiring.identity(S2222)),
        ("closed under composition", closed),
        ("generators reach every element", set(reached) == members),
    ])


MONOTONE = ("epr2", "robustness", "neff", "comm_avg", "comm_worst")


def test_criterion_9_monotonicity_suites(report):
    checks = []
    for name in MONOTONE:
        rep = monotonicity_suite(name, 200, seed=9)
        checks.append((f"{name}: 0 violations in {len(rep.pairs)} pairs",
                       len(rep.pairs) >= 200 and not rep.violations))
    rep = monotonicity_suite("chsh", 200, seed=9)
    checks.append(("chsh suite finds a coarse-graining increase",
                   len(rep.pairs) >= 200 and rep.violations_by_op["coarse_grain"] >= 1))
    rep = monotonicity_suite("relent", 200, seed=9)
    largening = rep.violations_by_op["enlarge_u"] + rep.violations_by_op["enlarge_c"]
    checks.append(("relent suite finds a largening increase", len(rep.pairs) >= 200 and largening >= 1))
    report(9, "monotonicity suites", checks)


def test_criterion_10_relative_entropy(report):
    r = relative_entropy_nl(pr_box(S2222), gap_tol=GAP_TOL)
    rng = random.Random(10)
    local_ok = all(relative_entropy_nl(random_local(S2222, rng)).value <= GAP_TOL for _ in range(10))
    tol = 3 * GAP_TOL
    convex_ok = coarse_ok = True
    for _ in range(50):
        p1, p2 = random_behaviour(S2222, rng), random_behaviour(S2222, rng)
        lam = Fraction(rng.randint(1, 9), 10)
        d1, d2 = relative_entropy_nl(p1).value, relative_entropy_nl(p2).value
        dm = relative_entropy_nl(mix([(lam, p1), (1 - lam, p2)])).value
        convex_ok &= dm <= float(lam) * d1 + float(1 - lam) * d2 + tol
        party = rng.choice("AB")
        x = rng.randrange(2)
        sets, reps = [None, None], [None, None]
        sets[x], reps[x] = [0, 1], rng.randrange(2)
        coarse_ok &= relative_entropy_nl(coarse_grain(p1, party, sets, reps)).value <= d1 + tol
    report(10, "relative entropy", [
        ("PR gap <= 1e-9", r.witness["gap"] <= GAP_TOL),
        ("PR within 1e4 iterations", r.witness["iterations"] <= 10_000),
        ("PR value near 4 log2(4/3)", abs(r.value - 4 * math.log2(4 / 3)) <= 2 * GAP_TOL),
        ("zero on local", local_ok),
        ("convexity on 50 cases", convex_ok),
        ("coarse graining on 50 cases", coarse_ok),
    ])
