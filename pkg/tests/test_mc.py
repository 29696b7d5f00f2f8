import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize, stats

from levyreach.measures import Atomic
from levyreach.mc import (
    MCEstimate,
    clopper_pearson,
    check_e_property,
    estimate_hitting,
    estimate_levy_support,
    estimate_stay_in_ball,
    exact_cp_hitting_oracle,
    suggest_trials,
    write_csv,
)
from levyreach.sde import zoo

PAIR = Atomic([1.0, -np.sqrt(2)], [1.0, 1.0])


def cp_by_root_finding(k, n, conf):
    a = 1 - conf
    lo = 0.0 if k == 0 else optimize.brentq(lambda p: stats.binom.sf(k - 1, n, p) - a / 2, 0, 1, xtol=1e-15)
    hi = 1.0 if k == n else optimize.brentq(lambda p: stats.binom.cdf(k, n, p) - a / 2, 0, 1, xtol=1e-15)
    return lo, hi


@settings(max_examples=60)
@given(st.integers(1, 5000), st.data())
def test_clopper_pearson_properties(n, data):
    k = data.draw(st.integers(0, n))
    lo, hi = clopper_pearson(k, n)
    assert 0 <= lo <= k / n <= hi <= 1
    assert (lo == 0) == (k == 0)
    rlo, rhi = cp_by_root_finding(k, n, 0.99)
    assert lo == pytest.approx(rlo, abs=1e-9) and hi == pytest.approx(rhi, abs=1e-9)


def test_suggest_trials():
    n = suggest_trials(1e-3)
    assert (1 - 1e-3) ** n <= 0.01 < (1 - 1e-3) ** (n - 1)


def test_frozen_hits_with_certainty():
    e = estimate_hitting(zoo.frozen(2), [0.1, 0.2], 1.0, [0.1, 0.2], 0.01, 1000)
    assert e.point == 1.0


def test_one_sided_never_hits_negative_ball():
    e = estimate_hitting(zoo.one_sided_counterexample(), [0.0], 1.0, [-1.0], 0.5, 20_000)
    assert e.successes == 0 and e.lo == 0


def test_worker_count_does_not_change_results():
    m = zoo.frame_fixed_2d()
    a = estimate_hitting(m, [0, 0], 1.0, [-1, -1], 0.3, 20_000, seed=5, workers=1)
    b = estimate_hitting(m, [0, 0], 1.0, [-1, -1], 0.3, 20_000, seed=5, workers=3)
    assert a.to_dict() == b.to_dict()
    c = estimate_hitting(m, [0, 0], 1.0, [-1, -1], 0.3, 20_000, seed=6)
    assert c.successes != a.successes or c.seed != a.seed


def test_oracle_trivial_cases():
    r = exact_cp_hitting_oracle(PAIR, 1.0, [0.0], 0.01)
    assert r.value >= math.exp(-2.0)
    assert r.terms[0][0] == (0, 0)
    assert exact_cp_hitting_oracle(Atomic([1.0], [1.0]), 1.0, [-1.0], 0.4).value == 0.0


def test_oracle_lattice_example_and_leading_term():
    r = exact_cp_hitting_oracle(PAIR, 1.0, [-0.7], 0.05, truncation=40)
    lead = math.exp(-2) / (math.factorial(5) * math.factorial(4))
    assert r.terms[0][0] == (5, 4)
    assert r.terms[0][1] == pytest.approx(lead, rel=1e-12)
    assert lead < r.value < 1.1 * lead
    assert r.tail_bound <= 1e-12


def test_oracle_against_brute_force_enumeration():
    # independent enumeration with floats and a margin check
    nu = Atomic([0.5, -0.8, 1.3], [0.4, 0.7, 0.2])
    y, kap = 0.35, 0.12
    ref = 0.0
    lam = nu.rates
    for a in range(25):
        for b in range(25):
            for c in range(25):
                v = 0.5 * a - 0.8 * b + 1.3 * c
                if abs(v - y) < kap:
                    ref += stats.poisson.pmf(a, lam[0]) * stats.poisson.pmf(b, lam[1]) * stats.poisson.pmf(c, lam[2])
    got = exact_cp_hitting_oracle(nu, 1.0, [y], kap, truncation=30).value
    assert got == pytest.approx(ref, rel=1e-9)


def test_levy_support_examples():
    e = estimate_levy_support(PAIR, 1.0, [0.0], 0.1, 5000)
    assert e.lo > 0
    one = Atomic([0.5, 1.5], [1.0, 1.0])
    assert estimate_levy_support(one, 1.0, [-0.5], 0.2, 5000).successes == 0


def test_levy_support_matches_oracle():
    p = exact_cp_hitting_oracle(PAIR, 1.0, [0.3], 0.05).value
    e = estimate_levy_support(PAIR, 1.0, [0.3], 0.05, 1_000_000, seed=11)
    assert abs(e.point - p) <= 3 * math.sqrt(p * (1 - p) / e.trials)


def test_stay_in_ball_examples():
    e = estimate_stay_in_ball(zoo.frozen(1), [0.0], 0.5, 1.0, 0.2, 5, 200)
    assert e.point == 1.0
    # drift 1 exits B(0, 0.5) from any probe within t = 1.1 > 2 * 0.5 / 1
    e = estimate_stay_in_ball(zoo.pure_drift([1.0]), [0.0], 0.5, 1.1, 0.1, 3, 100)
    assert e.successes == 0
    cubic = zoo.monotone_cubic(1, rate=1e-3)
    e = estimate_stay_in_ball(cubic, [0.0], 0.5, 0.1, 0.1, 4, 500)
    assert e.lo > 0


def test_e_property_examples():
    m = zoo.monotone_cubic(1)
    same = check_e_property(m, [0.4], [0.4], 1.0, 2000)
    assert same["mean"] == 0.0
    r = check_e_property(m, [1.0], [0.9], 1.0, 10_000)
    assert r["passed"] and r["mean"] <= 0.01 * 1.05


def _flat(atoms, drift):
    m = zoo.compound_poisson(Atomic(atoms, np.ones(len(atoms))), drift)
    m.tags = frozenset({"additive", "monotone-drift"})
    return m


def test_e_property_zero_drift_is_exact():
    # dyadic data keep every float addition exact, so the common noise cancels bit for bit
    r = check_e_property(_flat([0.5, -0.25], None), [0.75], [0.25], 1.0, 1000)
    assert r["mean"] == 0.25
    r = check_e_property(_flat([0.5, -0.3], [0.0]), [0.7], [0.2], 1.0, 1000)
    assert r["mean"] == pytest.approx(0.25, rel=1e-12)


def test_mc_csv(tmp_path):
    e = MCEstimate(100, 3, seed=1, label="x")
    text = write_csv([e], tmp_path / "mc.csv")
    lines = text.splitlines()
    assert lines[0] == "# levyreach-mc v1"
    assert lines[1] == "experiment,n,k,point,lo,hi,seed,wall_time"
    assert lines[2].startswith("x,100,3,0.03,")
