import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyreach.measures import (
    Atomic,
    RadialPolar,
    Tempering,
    check_assumption_v,
    check_support_conditions_1d,
    h0_approximate,
    verify_ball_sum,
)
from levyreach.measures.support import exact_combination, exact_sq_distance


def brute_force(atoms, target, tol, budget):
    """Exhaustive search over multiplicity vectors (oracle for the level search)."""
    best = None
    for total in range(0, budget + 1):
        for m in itertools.product(range(total + 1), repeat=len(atoms)):
            if sum(m) != total:
                continue
            v = sum(k * a for k, a in zip(m, atoms))
            if abs(v - target) < tol:
                key = (abs(v - target), m)
                if best is None or key < best[0]:
                    best = (key, m)
        if best is not None:
            return best[1]
    return None


def test_conditions_irrational_pair(irrational_pair):
    rep = check_support_conditions_1d(irrational_pair)
    assert rep.conditions["6"] == "pass"
    assert rep.h0_dense is True


def test_conditions_lattice_and_one_sided():
    rep = check_support_conditions_1d(Atomic([1.0, -1.0], [1, 1]))
    assert rep.conditions["6"] == "fail"
    assert rep.h0_dense is False
    rep = check_support_conditions_1d(Atomic([1.0, 2.0], [1, 1]))
    assert rep.h0_dense is False
    assert "one-sided" in rep.reason


def test_conditions_continuous_supports():
    rep = check_support_conditions_1d(RadialPolar.symmetric_1d(1.0))
    assert rep.h0_dense is True
    assert rep.conditions["2"] == "pass"
    one = RadialPolar(1.0, [[1.0]], [1.0])
    assert check_support_conditions_1d(one).h0_dense is False
    mixed = RadialPolar(0.5, [[1.0]], [1.0], Tempering.truncation(1.0))
    from levyreach.measures import Product
    assert check_support_conditions_1d(Product([mixed], [-1.0])).h0_dense is False


def test_h0_example_matches_exhaustive_search(irrational_pair):
    res = h0_approximate(irrational_pair, -0.7, 0.05, 20)
    assert res.multiplicities == (5, 4)
    assert res.value[0] == pytest.approx(-0.65685, abs=1e-5)
    assert res.error == pytest.approx(0.0431, abs=1e-4)
    assert brute_force([1.0, -np.sqrt(2)], -0.7, 0.05, 20) == (5, 4)


def test_h0_trivial_and_unreachable():
    a = Atomic([1.0, -np.sqrt(2)], [1, 1])
    assert h0_approximate(a, 1.0, 1e-6, 20).multiplicities == (1, 0)
    r = h0_approximate(Atomic([1.0], [1.0]), -1.0, 0.4, 20)
    assert not r.feasible and r.reason == "unreachable"


def test_h0_budget_tag():
    a = Atomic([1.0, -np.sqrt(2)], [1, 1])
    r = h0_approximate(a, -0.7, 0.05, 5)
    assert not r.feasible and r.reason == "budget"


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.02, 0.3))
def test_h0_replay_is_exact(target, tol):
    a = Atomic([1.0, -np.sqrt(2)], [1, 1])
    res = h0_approximate(a, target, tol, 25)
    if not res.feasible:
        return
    # replay the jump sequence in rational arithmetic
    acc = Fraction(0)
    for z in res.jumps()[:, 0]:
        acc += Fraction(float(z))
    assert (acc - Fraction(target)) ** 2 < Fraction(tol) ** 2
    brute = brute_force([1.0, -np.sqrt(2)], target, tol, 25)
    assert sum(brute) == res.total


def test_assumption_v_example(irrational_pair):
    cert = check_assumption_v(irrational_pair, -0.7, 0.1)
    assert cert.feasible
    assert len(cert.radii) == 9
    assert np.allclose(cert.radii, (0.1 - 0.0431457505) / 9, rtol=1e-6)
    assert verify_ball_sum(irrational_pair, cert.centers, cert.radii, cert.target, cert.eta)


def test_assumption_v_single_atom_and_one_sided():
    a = Atomic([1.0, -np.sqrt(2)], [1, 1])
    cert = check_assumption_v(a, 1.0, 0.3)
    assert cert.centers.shape == (1, 1) and cert.radii[0] == pytest.approx(0.3)
    assert not check_assumption_v(Atomic([1.0, 2.0], [1, 1]), -0.5, 0.2).feasible


@settings(max_examples=30, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(0.05, 0.5))
def test_assumption_v_certificates_reverify(h, eta_h):
    a = Atomic([1.0, -np.sqrt(2), 0.3], [1, 1, 2])
    cert = check_assumption_v(a, h, eta_h, budget=15)
    if cert.feasible:
        assert verify_ball_sum(a, cert.centers, cert.radii, cert.target, cert.eta)
        s = exact_combination(cert.centers, [1] * len(cert.centers))
        assert exact_sq_distance(s, [h]) <= Fraction(eta_h) ** 2


def test_verify_ball_sum_rejects_overfull():
    a = Atomic([1.0], [1.0])
    assert not verify_ball_sum(a, np.array([[1.0]]), [0.2], np.array([1.05]), 0.2)
    assert not verify_ball_sum(a, np.array([[1.0]]), [1.0], np.array([1.0]), 2.0)  # ball reaches 0
