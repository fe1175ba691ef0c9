import csv
import math

import numpy as np
import pytest
from scipy import stats

from carnot_ineq.errors import AdaptationFailed, InvalidParameter
from carnot_ineq.measures import (
    BoltzmannMeasure,
    GProfile,
    effective_sample_size,
    integrated_autocorr_time,
    mcmc_sample,
    radial_moments,
)
from carnot_ineq.measures.sampler import metropolis_step_batch


def exact_power4_h1(count, seed):
    """Exact draws from exp(-|x|^4 - 16 z^2) on H^1."""
    rng = np.random.default_rng(seed)
    u = np.abs(rng.normal(0.0, math.sqrt(0.5), count))  # |x|^2
    phi = rng.uniform(0, 2 * math.pi, count)
    x = np.sqrt(u)[:, None] * np.column_stack([np.cos(phi), np.sin(phi)])
    z = rng.normal(0.0, math.sqrt(1 / 32), (count, 1))
    return x, z


def norm_bins(N, bins=20):
    # N^4 ~ Exp(1) under power(4) on H^1 with a = 16
    edges = (-np.log1p(-np.arange(1, bins) / bins)) ** 0.25
    return np.bincount(np.searchsorted(edges, N), minlength=bins)


def test_acceptance_and_ess(chain4):
    assert 0.23 <= chain4.acceptance_rate <= 0.40
    assert chain4.ess_ok and chain4.ess >= 0.01 * len(chain4)
    assert len(chain4) == 100_000 and chain4.burn_in == 20_000
    assert not chain4.x.flags.writeable


def test_moments_match_oracle(chain4, mu4):
    oracle = radial_moments(mu4)
    mom = chain4.moments()
    for key in ("E_N", "E_N2", "E_x2"):
        assert abs(mom[key] - oracle[key]) <= 0.02 * oracle[key]
        assert abs(mom[key] - oracle[key]) <= 3 * mom[key + "_se"]


def test_two_seeds_agree(chain4, mu4):
    other = mcmc_sample(mu4, 100_000, seed=2)
    a, b = chain4.moments(), other.moments()
    assert abs(a["E_N2"] - b["E_N2"]) <= 3 * math.hypot(a["E_N2_se"], b["E_N2_se"])


def test_deterministic(mu4):
    a = mcmc_sample(mu4, 10_000, seed=9)
    b = mcmc_sample(mu4, 10_000, seed=9)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.z, b.z)
    assert a.step == b.step and a.acceptance_rate == b.acceptance_rate
    c = mcmc_sample(mu4, 10_000, seed=10)
    assert not np.array_equal(a.x, c.x)


def test_isotropic_proposal(mu4):
    ch = mcmc_sample(mu4, 20_000, seed=3, proposal="isotropic")
    assert 0.23 <= ch.acceptance_rate <= 0.40
    assert ch.proposal == "isotropic"


def test_argument_errors(mu4):
    with pytest.raises(InvalidParameter):
        mcmc_sample(mu4, 9_999, seed=0)
    with pytest.raises(InvalidParameter):
        mcmc_sample(mu4, 10_000, seed=0, step0=0.0)
    with pytest.raises(InvalidParameter):
        mcmc_sample(mu4, 10_000, seed=0, proposal="langevin")


def test_adaptation_failure(mu4):
    with pytest.raises(AdaptationFailed):
        mcmc_sample(mu4, 10_000, seed=0, step0=1e8)


def test_csv_export(tmp_path, mu4, G42):
    ch = mcmc_sample(mu4, 10_000, seed=4)
    path = tmp_path / "chain.csv"
    ch.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["idx", "x1", "x2", "z1"]
    assert len(rows) == 10_001
    assert float(rows[5][1]) == ch.x[4, 0]
    ch42 = mcmc_sample(BoltzmannMeasure(G42, GProfile.power(4)), 10_000, seed=0)
    ch42.to_csv(path)
    assert next(csv.reader(open(path))) == ["idx", "x1", "x2", "x3", "x4", "z1", "z2"]


def test_mean_se_shape_check(chain4):
    with pytest.raises(InvalidParameter):
        chain4.mean_se(np.ones(3))


def test_autocorrelation_time_ar1():
    rng = np.random.default_rng(0)
    rho = 0.8
    e = rng.standard_normal(400_000)
    y = np.empty_like(e)
    y[0] = e[0]
    for i in range(1, e.size):
        y[i] = rho * y[i - 1] + e[i]
    tau = integrated_autocorr_time(y)
    assert tau == pytest.approx((1 + rho) / (1 - rho), rel=0.1)
    assert effective_sample_size(rng.standard_normal(50_000)) == pytest.approx(50_000, rel=0.1)


def test_exact_sampler_oracle():
    x, z = exact_power4_h1(200_000, 1)
    N = (np.sum(x * x, 1) ** 2 + 16 * z[:, 0] ** 2) ** 0.25
    counts = norm_bins(N)
    assert stats.chisquare(counts).pvalue > 0.0027


def test_detailed_balance_smoke(mu4):
    x, z = exact_power4_h1(200_000, 2)
    rng = np.random.default_rng(5)
    x1, z1, acc = metropolis_step_batch(mu4, x, z, 0.6, rng)
    assert 0.1 < acc.mean() < 0.9
    N1 = (np.sum(x1 * x1, 1) ** 2 + 16 * z1[:, 0] ** 2) ** 0.25
    assert stats.chisquare(norm_bins(N1)).pvalue > 0.0027
    # a kernel that accepts every proposal does not preserve the target
    rng = np.random.default_rng(5)
    xb = x + 0.6 * rng.standard_normal(x.shape)
    zb = z + 0.36 * rng.standard_normal(z.shape)
    Nb = (np.sum(xb * xb, 1) ** 2 + 16 * zb[:, 0] ** 2) ** 0.25
    assert stats.chisquare(norm_bins(Nb)).pvalue < 1e-6


@pytest.mark.parametrize(
    "prof", [GProfile.cosh_power(1), GProfile.power_log(3), GProfile.alpha_power(4, 1.0), GProfile.power(2)],
    ids=lambda p: p.label,
)
def test_other_profiles_match_oracle(H1, prof):
    mu = BoltzmannMeasure(H1, prof)
    ch = mcmc_sample(mu, 100_000, seed=11)
    assert 0.23 <= ch.acceptance_rate <= 0.40
    oracle, mom = radial_moments(mu), ch.moments()
    for key in ("E_N", "E_N2", "E_x2"):
        assert abs(mom[key] - oracle[key]) <= 3 * mom[key + "_se"]


def test_custom_profile_sampling(H1):
    prof = GProfile.custom(lambda s: s**4, lambda s: 4 * s**3, lambda s: 12 * s**2)
    mu = BoltzmannMeasure(H1, prof)
    ch = mcmc_sample(mu, 10_000, seed=0)
    ref = mcmc_sample(BoltzmannMeasure(H1, GProfile.power(4)), 10_000, seed=0, backend="python")
    assert ch.backend == "python"
    assert np.allclose(ch.x, ref.x, rtol=1e-12, atol=1e-12)
