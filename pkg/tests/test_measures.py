import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from levyreach.errors import EmptyRegionError, InfiniteMassError
from levyreach.measures import (
    Annulus,
    Atomic,
    Ball,
    GaussianBase,
    Product,
    RadialPolar,
    Subordinated,
    Tempering,
    compensator_drift,
    mass_of_region,
    measure_from_config,
    measure_to_config,
    sample_jump,
)


def test_atomic_mass_examples():
    m = Atomic([[1.0], [-0.5]], [2.0, 3.0])
    assert mass_of_region(m, 1) == 0.0  # |z| > 1 is strict
    assert mass_of_region(m, 4) == 5.0


def test_radial_mass_closed_form_and_quadrature():
    m = RadialPolar.symmetric_1d(1.0)
    oracle = 2 * integrate.quad(lambda r: r ** -2.0, 1, np.inf)[0]
    assert mass_of_region(m, 1) == pytest.approx(2.0, rel=1e-12)
    assert oracle == pytest.approx(2.0, rel=1e-8)


def test_tempered_mass_matches_independent_quadrature():
    t = Tempering.exponential(0.7)
    m = RadialPolar.symmetric_1d(1.3, t)
    got = mass_of_region(m, 3)
    ref = 2 * integrate.quad(lambda r: np.exp(-0.7 * r) * r ** -2.3, 1 / 3, np.inf, epsrel=1e-12)[0]
    assert got == pytest.approx(ref, rel=1e-8)


def test_truncated_mass_and_infinite_small_ball():
    m = RadialPolar.symmetric_1d(0.0, Tempering.truncation(2.0))
    assert mass_of_region(m, 1) == pytest.approx(2 * np.log(2.0))
    assert m.mass_annulus(0.0, 1.0) == np.inf


@given(st.lists(st.floats(0.05, 5.0), min_size=1, max_size=6), st.integers(1, 30))
def test_atomic_mass_monotone_in_m(norms, m):
    locs = np.array(norms) * np.where(np.arange(len(norms)) % 2, 1, -1)
    nu = Atomic(locs, np.ones(len(norms)))
    assert mass_of_region(nu, m) <= mass_of_region(nu, m + 1)
    big = int(np.ceil(1 / min(norms))) + 1
    assert mass_of_region(nu, big) == pytest.approx(len(norms))


def test_atomic_rejects_origin_and_bad_rates():
    with pytest.raises(ValueError):
        Atomic([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Atomic([1.0], [0.0])


def test_sample_jump_frequencies():
    nu = Atomic([1.0, -1.0], [1.0, 3.0])
    draws = sample_jump(nu, Annulus(2), np.random.default_rng(0), size=10_000)
    frac = np.mean(draws[:, 0] < 0)
    lo, hi = stats.binom.interval(0.999, 10_000, 0.75)
    assert lo / 1e4 <= frac <= hi / 1e4
    assert abs(frac - 0.75) < 0.02


def test_sample_jump_single_atom_ball_and_empty_region():
    nu = Atomic([1.0], [1.0])
    for _ in range(5):
        assert sample_jump(nu, Ball((1.0,), 0.1), 0)[0] == 1.0
    with pytest.raises(EmptyRegionError):
        sample_jump(nu, Ball((3.0,), 0.1), 0)
    with pytest.raises(EmptyRegionError):
        sample_jump(nu, Annulus(0.5), 0)


def test_sample_jump_infinite_region():
    with pytest.raises(InfiniteMassError):
        sample_jump(RadialPolar.symmetric_1d(1.0), Ball((0.0,), 0.5), 0)


def test_radial_samples_stay_in_region_and_match_law():
    m = RadialPolar.symmetric_1d(1.5)
    x = sample_jump(m, Annulus(2), 1, size=20_000)[:, 0]
    assert np.all(np.abs(x) > 0.5)
    # |X| has tail P(|X| > r) = (r / 0.5)^-1.5
    ks = stats.kstest(np.abs(x), lambda r: 1 - (r / 0.5) ** -1.5)
    assert ks.pvalue > 1e-3


def test_ball_sampling_radial_2d():
    m = RadialPolar.from_sphere_density(2, 1.0, n_directions=64)
    c = np.array([0.5, 0.2])
    z = sample_jump(m, Ball(tuple(c), 0.1), 2, size=500)
    assert np.all(np.linalg.norm(z - c, axis=1) < 0.1)


def test_compensator_examples():
    sym = Atomic([0.6, -0.6], [2.0, 2.0])
    add = lambda x, z: z
    for m in (2, 3, 10):
        assert np.allclose(compensator_drift(sym, add, [0.3], m), 0.0)
    one = Atomic([0.6], [1.0])
    assert compensator_drift(one, add, [0.0], 2) == pytest.approx([0.6])
    assert np.all(compensator_drift(one, add, [0.0], 1) == 0.0)


def test_compensator_quadrature_against_closed_form():
    m = RadialPolar(0.5, [[1.0]], [1.0])
    # sigma(x, z) = (1 + x) z: integral of r * r^-1.5 over (0.1, 1]
    got = compensator_drift(m, lambda x, z: (1 + x) * z, np.array([0.5]), 10)
    exact = 1.5 * 2 * (1 - np.sqrt(0.1))
    assert got[0] == pytest.approx(exact, rel=1e-8)
    assert compensator_drift(m, None, [0.0], 10)[0] == pytest.approx(exact / 1.5, rel=1e-10)


def test_product_integrability_matches_coordinates():
    c1 = RadialPolar.symmetric_1d(1.0, Tempering.exponential(1.0))
    c2 = Atomic([0.5, -2.0], [1.0, 1.0])
    p = Product([c1, c2], scales=[2.0, 0.5])
    per = p.coordinate_integrability()
    assert np.isfinite(p.integrability())
    assert p.integrability() <= sum(per) * (1 + 1e-8) or p.integrability() == pytest.approx(sum(per), rel=1e-6)


def test_product_mass_adds_scaled_coordinates():
    c = Atomic([0.5, -2.0], [1.0, 3.0])
    p = Product([c, c], scales=[1.0, 4.0])
    # |z| > 1: coordinate 1 keeps the atom -2 (rate 3); coordinate 2 (scaled by 4) keeps both
    assert mass_of_region(p, 1) == pytest.approx(3.0 + 4.0)


def test_subordinated_gaussian_marks_moments():
    sub = Subordinated(GaussianBase([[1.0]]), Atomic([1.0], [2.0]))
    assert sub.mass_beyond(0.0) == pytest.approx(2.0)
    z = sub.sample_annulus(1e-3, np.inf, 10_000, np.random.default_rng(3))[:, 0]
    assert abs(z.var() - 1.0) < 0.05


def test_subordinated_product_is_explicit_atomic():
    base = Product([Atomic([1.0, -1.0], [1.0, 1.0])])
    sub = Subordinated(base, Atomic([1.0], [1.0]))
    assert sub.finite_activity
    # the atom +1 appears with the probability of one net jump of +1 in unit time
    assert sub.mass_in_ball(np.array([1.0]), 0.1) > 0


def test_config_round_trip():
    tree = {"variant": "radial", "alpha": 0.5, "directions": [[1, 0], [0, 1]],
            "tempering": {"kind": "truncation", "radius": 1}}
    m = measure_from_config(tree)
    c1 = measure_to_config(m)
    assert measure_to_config(measure_from_config(c1)) == c1
    a = measure_from_config({"variant": "atomic", "atoms": ["1", "-sqrt(2)"]})
    assert a.locations[1, 0] == -np.sqrt(2)


@settings(max_examples=30)
@given(st.floats(0.2, 1.8), st.floats(0.0, 2.0), st.integers(1, 20))
def test_radial_integrability_finite(alpha, rate, m):
    nu = RadialPolar.symmetric_1d(alpha, Tempering(1.0, rate))
    assert np.isfinite(nu.integrability())
    assert np.isfinite(mass_of_region(nu, m))
