from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyreach.errors import SingularCoefficientError
from levyreach.measures import Atomic, RadialPolar, Tempering
from levyreach.planner import (
    Infeasible,
    JumpChainCertificate,
    greedy_length_bound,
    plan_additive,
    plan_coordinatewise,
    plan_greedy_frame,
    plan_one_step_inverse,
    smallest_m,
    verify_certificate,
)
from levyreach.sde import ModelSpec
from levyreach.sde import zoo

from instances import random_coordinate_model

PAIR = Atomic([1.0, -np.sqrt(2)], [1.0, 1.0])


def _matrix_model(M, measure):
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    return ModelSpec(d, lambda X: np.zeros_like(X), lambda X, Z: Z @ M.T, measure,
                     name="matrix", matrix=lambda X: np.broadcast_to(M, (X.shape[0], d, d)))


def test_smallest_m():
    assert smallest_m(np.array([[1.0]]), np.array([0.1])) == 2
    assert smallest_m(np.array([[0.3], [2.0]]), np.array([0.01, 0.5])) == 4


def test_additive_example():
    cert = plan_additive(PAIR, 0.0, -0.7, 0.2)
    assert cert.n_steps == 9
    assert cert.q[-1, 0] == pytest.approx(-0.65685, abs=1e-5)
    assert cert.eps.sum() < 0.1
    assert verify_certificate(cert, zoo.compound_poisson(PAIR, [0.0]), PAIR).passed


def test_additive_single_step_and_one_sided():
    cert = plan_additive(PAIR, 0.5, 1.5, 0.3)
    assert cert.n_steps == 1 and cert.q[-1, 0] == 1.5
    bad = plan_additive(Atomic([0.5, 1.5], [1, 1]), 0.0, -1.0, 0.2)
    assert isinstance(bad, Infeasible) and bad.tag == "unreachable"


def test_certificate_json_round_trip():
    cert = plan_additive(PAIR, 0.0, -0.7, 0.2)
    back = JumpChainCertificate.from_json(cert.to_json())
    assert np.array_equal(back.q, cert.q) and np.array_equal(back.eta, cert.eta)
    assert back.m0 == cert.m0


def test_one_step_inverse_examples():
    nu = RadialPolar.from_sphere_density(2, 1.0, tempering=Tempering.exponential(1.0), n_directions=64)
    cert = plan_one_step_inverse(_matrix_model(np.eye(2), nu), [0, 0], [1, 2], 0.2)
    assert np.array_equal(cert.l[0], [1.0, 2.0]) and np.array_equal(cert.q[-1], [1.0, 2.0])
    cert = plan_one_step_inverse(_matrix_model(2 * np.eye(2), nu), [0, 0], [1, 0], 0.2)
    assert np.allclose(cert.l[0], [0.5, 0.0])
    with pytest.raises(SingularCoefficientError):
        plan_one_step_inverse(_matrix_model(np.diag([1.0, 0.0]), nu), [0, 0], [1, 0], 0.2)


def sign_walk_oracle(start, target, eta, atom):
    """Exact rational sign walk with a fixed step atom on every coordinate."""
    delta = Fraction(eta) / (4 * len(start))
    q = [Fraction(s) for s in start]
    counts = []
    for i, y in enumerate(target):
        y = Fraction(y)
        k = 0
        while abs(y - q[i]) > delta / 2:
            q[i] += atom if y > q[i] else -atom
            k += 1
        counts.append(k)
    return counts, q


def test_coordinatewise_example():
    one = lambda X: np.ones_like(X)
    m = zoo.coordinate_walk(one, [1.0, 1.0], kappa=(1.0, 1.0))
    cert = plan_coordinatewise(m, [0.0, 0.0], [0.75, -0.25], 0.8)
    # the largest atom under the cap kappa1 |c| <= eta / (8 N) = 0.05 is 2^-5
    counts, q = sign_walk_oracle([0, 0], [0.75, -0.25], Fraction(8, 10), Fraction(1, 32))
    assert cert.meta["step_atoms"] == [2.0 ** -5, -(2.0 ** -5)]
    assert cert.meta["steps_per_coordinate"] == counts == [23, 7]
    assert [Fraction(float(v)) for v in cert.q[-1]] == q
    assert cert.terminal_error <= 3 * 0.8 / 8
    assert verify_certificate(cert, m).passed


def test_coordinatewise_trivial_and_sign_obstruction():
    one = lambda X: np.ones_like(X)
    m = zoo.coordinate_walk(one, [1.0, 1.0])
    assert plan_coordinatewise(m, [0.2, 0.1], [0.2, 0.1], 0.5).n_steps == 0
    pos = zoo.coordinate_walk(one, [1.0, 1.0], atoms=[2.0 ** -k for k in range(10)])
    bad = plan_coordinatewise(pos, [0.0, 0.0], [-0.5, 0.0], 0.5)
    assert isinstance(bad, Infeasible) and bad.tag == "sign"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=3), st.floats(0.2, 1.0), st.integers(0, 1000))
def test_coordinatewise_bound_random(y, eta, seed):
    d = len(y)
    m = random_coordinate_model(d, np.random.default_rng(seed))
    assert m.validate(rng=seed) == []
    cert = plan_coordinatewise(m, np.zeros(d), y, eta)
    assert cert.exact_terminal_error_sq() <= (Fraction(3) * Fraction(eta) / 8) ** 2
    assert verify_certificate(cert, m, samples=0).passed


def test_greedy_continuous_example():
    m = zoo.frame_fixed_2d(radii=None)
    cert = plan_greedy_frame(m, [0, 0], [-1, -1], 0.3)
    s = cert.meta["steps"]
    assert cert.n_steps == 2
    assert s[0]["index"] == 2 and s[0]["r0"] == pytest.approx(1.0)
    assert np.allclose(cert.q[1], [-1 / np.sqrt(2)] * 2)
    assert s[1]["r0"] == pytest.approx(np.sqrt(2) - 1)
    assert np.allclose(cert.q[2], [-1, -1], atol=1e-15)
    assert verify_certificate(cert, m).passed


def test_greedy_quadrant_fails_condition_I():
    bad = plan_greedy_frame(zoo.quadrant_locked_2d(), [0, 0], [-1, -1], 0.3)
    assert isinstance(bad, Infeasible) and bad.tag == "condition-I"
    assert plan_greedy_frame(zoo.frame_fixed_2d(), [0.3, 0.3], [0.3, 0.3], 0.3).n_steps == 0


def test_greedy_surrogate_is_short_and_verified():
    m = zoo.frame_fixed_2d()
    cert = plan_greedy_frame(m, [0, 0], [-1, -1], 0.3)
    assert 1 <= cert.n_steps <= 12
    assert verify_certificate(cert, m).passed


def test_greedy_length_bound_monotone():
    assert greedy_length_bound(0.01, 0.3, 0.5, 1.0) == 0
    a = greedy_length_bound(1.0, 0.1, 0.5, 2.0)
    assert a <= greedy_length_bound(2.0, 0.1, 0.5, 2.0)
    assert a <= greedy_length_bound(1.0, 0.1, 0.3, 2.0)


def _additive_cert(eps, eta):
    model = zoo.compound_poisson(Atomic([1.0], [1.0]), [0.0])
    q = np.array([[0.0], [1.0]])
    return model, JumpChainCertificate(q, [[1.0]], [eps], eta, smallest_m(np.array([[1.0]]), np.array([eps])),
                                       [1.0], 0.5, "manual")


def test_verify_additive_triangle_certificate_passes():
    # dyadic radii make eta_0 + eps_1 = eta_1 hold exactly
    model, cert = _additive_cert(1 / 16, [1 / 8, 3 / 16])
    rep = verify_certificate(cert, model)
    assert rep.passed and rep.deterministic_ok


def test_verify_detects_constructed_violation():
    model, cert = _additive_cert(0.05, [0.1, 0.12])
    rep = verify_certificate(cert, model)
    assert not rep.passed
    assert rep.sampled_violations > 0 and rep.witness["step"] == 1
    assert rep.witness["distance"] >= 0.12


def test_verify_lipschitz_scalar_deterministic():
    m = zoo.lipschitz_scalar_1d()
    q0, l = 0.0, 0.8
    q1 = q0 + float(m.jump(q0, l))
    eps, eta0 = 0.01, 0.01
    # eta0 (1 + 0.1 (|l| + eps)) + eps * 1.1
    eta1 = (eta0 * (1 + 0.1 * (l + eps)) + eps * 1.1) * 1.001
    cert = JumpChainCertificate([[q0], [q1]], [[l]], [eps], [eta0, eta1], 2, [q1], eta1 + 1e-3)
    rep = verify_certificate(cert, m)
    assert rep.deterministic_ok is True and rep.passed


def test_verify_structural_failures():
    model, cert = _additive_cert(0.05, [0.1, 0.15])
    cert.q[1, 0] = 1.0 + 2.0 ** -40
    rep = verify_certificate(cert, model)
    assert not rep.passed and any("chain" in s for s in rep.structural)
    model, cert = _additive_cert(0.05, [0.2, 0.15])
    assert any("monotone" in s for s in verify_certificate(cert, model).structural)
