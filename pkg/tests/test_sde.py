import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyreach.errors import DivergenceError
from levyreach.levy import NoiseRealization, empty_noise, sample_noise
from levyreach.measures import Atomic, RadialPolar, Tempering
from levyreach.sde import (
    LipschitzBounds,
    ModelSpec,
    exit_time,
    first_jump_time,
    integrate,
    integrate_truncated,
    make_model,
)
from levyreach.sde import zoo


def _noise(times, marks, T=1.0):
    marks = np.asarray(marks, dtype=float).reshape(len(times), -1)
    return NoiseRealization(T, np.asarray(times, dtype=float), marks, 1e-3, "drop-with-compensator", 0)


def test_linear_decay_ode():
    m = ModelSpec(1, lambda X: -X, lambda X, Z: Z, tags={"additive"})
    p = integrate(m, [1.0], empty_noise(1, 1.0), 1e-4)
    assert p.final[0] == pytest.approx(np.exp(-1), abs=1e-3)


def test_telescoping_additive_scheme():
    nu = Atomic([0.4, -0.7, 1.3], [1.0, 2.0, 0.5])
    m = zoo.compound_poisson(nu, drift=[0.0])
    noise = sample_noise(nu, 2.0, 1e-3, rng=3)
    p = integrate(m, [0.25], noise, 0.05)
    comp = np.asarray(nu.first_moment(1e-3, 1.0)).reshape(1)
    expect = 0.25 + noise.marks[:, 0].sum() - comp[0] * 2.0
    assert p.final[0] == pytest.approx(expect, abs=1e-12)
    assert p.jump_consistency(m)


def test_frozen_model_never_moves():
    m = zoo.frozen(2)
    nu = RadialPolar.from_sphere_density(2, 1.0, n_directions=16)
    p = integrate(m, [0.3, -0.2], sample_noise(nu, 1.0, 0.05, rng=1), 0.1, measure=nu)
    assert np.all(p.states == np.array([0.3, -0.2]))


def test_one_sided_paths_stay_nonnegative():
    m = zoo.one_sided_counterexample()
    for s in range(50):
        noise = sample_noise(m.measure, 1.0, 1e-3, rng=s)
        p = integrate(m, [0.0], noise, 1e-2)
        assert np.all(p.states >= 0)


def test_first_jump_time_examples():
    n = _noise([0.2, 0.5, 0.9], [2.0, 0.3, 1.5])
    assert first_jump_time(n, 1, 2) == 0.9
    assert first_jump_time(n, 1, 3) is None
    assert first_jump_time(n, 10, 1) == 0.2
    assert first_jump_time(n, 4, 2) == 0.5


def test_exit_time_examples():
    m = zoo.frozen(1)
    p = integrate(m, [0.0], empty_noise(1, 1.0), 0.1)
    assert exit_time(p, [0.0], 0.5) is None
    jumpy = ModelSpec(1, lambda X: np.zeros_like(X), lambda X, Z: Z, tags={"additive"})
    p = integrate(jumpy, [0.0], _noise([0.3], [1.0]), 0.1)
    assert exit_time(p, [0.0], 0.5) == pytest.approx(0.3)
    drift = zoo.pure_drift([1.0])
    p = integrate(drift, [0.0], empty_noise(1, 1.0), 0.25)
    # x(t) = t leaves B(0, 0.3) between grid points; first recorded outside time is 0.5
    assert exit_time(p, [0.0], 0.3) == pytest.approx(0.5)


def test_truncation_with_no_big_marks_is_identical():
    nu = RadialPolar.symmetric_1d(1.2, Tempering.truncation(0.4))
    m = zoo.ornstein_uhlenbeck(1.0, nu)
    noise = sample_noise(nu, 1.0, 0.01, rng=4)
    a, b = integrate(m, [0.5], noise, 0.01), integrate_truncated(m, [0.5], noise, 0.01, 2)
    assert np.array_equal(a.states, b.states)


def test_truncated_m1_symmetric_has_no_big_jumps():
    nu = Atomic([0.5, -0.5, 2.0, -2.0], [1.0, 1.0, 1.0, 1.0])
    m = zoo.compound_poisson(nu, drift=[0.0])
    noise = sample_noise(nu, 3.0, 1e-3, rng=5)
    p = integrate_truncated(m, [0.0], noise, 0.05, 1)
    for j in p.jumps:
        assert np.linalg.norm(j["mark"]) <= 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 4]), st.floats(0.2, 1.8))
def test_truncation_coincides_before_first_big_jump(seed, m, alpha):
    nu = RadialPolar.symmetric_1d(alpha, Tempering.exponential(1.0))
    model = zoo.ornstein_uhlenbeck(0.7, nu)
    noise = sample_noise(nu, 1.0, 0.05, rng=seed)
    full = integrate(model, [0.2], noise, 0.05)
    trunc = integrate_truncated(model, [0.2], noise, 0.05, m)
    tau = first_jump_time(noise, m)
    tau = np.inf if tau is None else tau
    tf, xf = full.before(tau)
    tt, xt = trunc.before(tau)
    assert np.array_equal(tf, tt) and np.array_equal(xf, xt)


def test_divergence_raises():
    m = ModelSpec(1, lambda X: X ** 3, lambda X, Z: Z, tags={"additive"})
    with pytest.raises(DivergenceError):
        integrate(m, [10.0], empty_noise(1, 1.0), 0.1)


def test_csv_export_schema():
    m = zoo.pure_drift([1.0, -1.0])
    p = integrate(m, [0.0, 0.0], empty_noise(2, 0.2), 0.1)
    lines = p.to_csv().splitlines()
    assert lines[0] == "# levyreach-path v1"
    assert lines[1] == "time,x1,x2,jump"
    assert len(lines) == 2 + len(p.times)


@pytest.mark.parametrize("name", sorted(zoo.REGISTRY))
def test_zoo_models_validate(name):
    m = make_model(name)
    assert m.validate(rng=0) == []


def test_validate_catches_false_additive_claim():
    m = ModelSpec(1, lambda X: np.zeros_like(X), lambda X, Z: 2 * Z, tags={"additive"})
    assert any("additive" in v for v in m.validate(rng=0))


def test_validate_catches_false_lipschitz_bound():
    m = ModelSpec(1, lambda X: np.zeros_like(X), lambda X, Z: (1 + np.sin(5 * X)) * Z,
                  lipschitz=LipschitzBounds(0.1, 2.0))
    assert m.validate(rng=0)


def test_frame_constants():
    m = zoo.frame_fixed_2d()
    assert m.kappa == pytest.approx(np.sin(np.pi / 8), abs=1e-3)
    assert zoo.quadrant_locked_2d().kappa < 0


def test_singular_stable_like_bounds():
    m = zoo.singular_stable_like()
    rng = np.random.default_rng(0)
    for x in rng.standard_normal((200, 2)) * 3:
        s = np.linalg.svd(m.sigma_matrix(x), compute_uv=False)
        assert 1 / m.Lambda <= s.min() + 1e-12 and s.max() <= m.Lambda + 1e-12
    noise = sample_noise(m.measure, 1.0, 0.05, rng=1)
    p = integrate(m, [0.0, 0.0], noise, 0.05)
    assert p.jump_consistency(m)
