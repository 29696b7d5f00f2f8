import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from levyreach.errors import InfiniteMassError
from levyreach.levy import (
    DROP,
    GAUSSIAN,
    NoiseRealization,
    annulus_index,
    empty_noise,
    sample_noise,
    sample_noise_batch,
    sample_stable_1d,
    sample_subordinated_path,
    super_cutoff_mass,
)
from levyreach.measures import Atomic, GaussianBase, RadialPolar, Tempering


def test_poisson_count_mean_within_3_sigma():
    nu = Atomic([1.0, -np.sqrt(2)], [1.0, 0.5])
    counts = [sample_noise(nu, 2.0, 1e-2, rng=s).n_jumps for s in range(10_000)]
    lam = 2.0 * 1.5
    assert abs(np.mean(counts) - lam) <= 3 * np.sqrt(lam / 10_000)


def test_zero_horizon_is_empty():
    n = sample_noise(RadialPolar.symmetric_1d(1.0), 0.0, 1e-3, rng=1)
    assert n.n_jumps == 0 and n.horizon == 0.0


def test_noise_invariants():
    nu = RadialPolar.symmetric_1d(0.8)
    n = sample_noise(nu, 3.0, 0.05, rng=2)
    assert n.n_jumps > 0
    assert np.all(np.diff(n.times) > 0)
    assert np.all((n.times > 0) & (n.times <= 3.0))
    assert np.all(np.linalg.norm(n.marks, axis=1) > 0.05)
    assert np.array_equal(n.annulus, annulus_index(n.marks))


def test_truncated_flight_marks_bounded():
    nu = RadialPolar.symmetric_1d(0.0, Tempering.truncation(0.8))
    n = sample_noise(nu, 50.0, 1e-2, rng=3)
    assert n.n_jumps > 100
    assert np.all(np.linalg.norm(n.marks, axis=1) <= 0.8)


def test_infinite_mass_above_cutoff_is_an_error():
    # alpha = 0 without tempering has infinite mass at every scale? no: the tail diverges
    nu = RadialPolar(0.0, [[1.0]], [1.0])
    with pytest.raises(InfiniteMassError):
        super_cutoff_mass(nu, 0.1)


def test_restrict_is_thinning_and_json_round_trip():
    nu = Atomic([0.3, -2.0, 1.1], [1.0, 1.0, 1.0])
    n = sample_noise(nu, 5.0, 1e-3, rng=4)
    r = n.restrict(0.5)
    assert np.all(np.linalg.norm(r.marks, axis=1) > 0.5)
    assert set(r.times) <= set(n.times)
    back = NoiseRealization.from_json(n.to_json())
    assert np.array_equal(back.times, n.times) and np.array_equal(back.marks, n.marks)


def test_gaussian_mode_carries_covariance():
    nu = RadialPolar.symmetric_1d(1.2)
    n = sample_noise(nu, 1.0, 0.1, mode=GAUSSIAN, rng=5)
    var = 2 * (0.1 ** 0.8) / 0.8  # int_{|z|<=0.1} z^2 |z|^-2.2 dz
    assert n.gaussian_cov[0, 0] == pytest.approx(var, rel=1e-6)
    assert sample_noise(nu, 1.0, 0.1, mode=DROP, rng=5).gaussian_cov is None


def test_batch_matches_path_structure():
    nu = Atomic([1.0], [2.0])
    b = sample_noise_batch(nu, 1.0, 1e-3, 1000, np.random.default_rng(6))
    assert b.counts.sum() == len(b.times)
    for p in (0, 10, 999):
        r = b.realization(p)
        assert r.n_jumps == b.counts[p]
        assert np.all(np.diff(r.times) >= 0)


def test_cauchy_calibration():
    x = sample_stable_1d(1.0, 0.0, 7, size=100_000)
    assert abs(np.mean(np.abs(x) <= 1) - 0.5) <= 0.01


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 1.9])
def test_symmetric_median(alpha):
    x = sample_stable_1d(alpha, 0.0, 8, size=50_000)
    assert abs(np.median(x)) <= 0.02


def test_one_sided_half_stable_positive_and_levy_law():
    x = sample_stable_1d(0.5, 1.0, 9, size=20_000)
    assert np.all(x > 0)
    # S_{1/2}(1, 1, 0) is the Levy law 1 / Z^2
    oracle = 1.0 / np.random.default_rng(10).standard_normal(20_000) ** 2
    assert stats.ks_2samp(x, oracle).pvalue > 1e-3


def test_stable_against_scipy_levy_stable():
    x = sample_stable_1d(1.5, 0.5, 11, size=3000)
    ks = stats.kstest(x, stats.levy_stable(1.5, 0.5).cdf)
    assert ks.pvalue > 1e-3


def test_stable_rejects_bad_parameters():
    with pytest.raises(ValueError):
        sample_stable_1d(2.5)
    with pytest.raises(ValueError):
        sample_stable_1d(1.0, 1.5)


def test_subordinated_gaussian_marks_and_counts():
    base = GaussianBase([[1.0]])
    sub = Atomic([1.0], [3.0])
    counts, marks = [], []
    for s in range(4000):
        n = sample_subordinated_path(base, sub, 1.0, 1e-9, rng=s)
        counts.append(n.n_jumps)
        marks.extend(n.marks[:, 0])
    assert abs(np.mean(counts) - 3.0) <= 3 * np.sqrt(3.0 / 4000)
    assert abs(np.var(marks) - 1.0) <= 0.05
    assert sample_subordinated_path(base, sub, 0.0, rng=0).n_jumps == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 3.0))
def test_seed_reproducibility(seed, T):
    nu = Atomic([1.0, -0.4], [1.0, 2.0])
    a, b = sample_noise(nu, T, 1e-3, rng=seed), sample_noise(nu, T, 1e-3, rng=seed)
    assert np.array_equal(a.times, b.times) and np.array_equal(a.marks, b.marks)


def test_empty_noise_shape():
    e = empty_noise(3, 1.0)
    assert e.marks.shape == (0, 3) and e.n_jumps == 0
