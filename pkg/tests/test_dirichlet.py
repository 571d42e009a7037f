import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as spi
from scipy import special as sps

from direp import (
    ConvergenceError,
    DomainError,
    ModeUndefinedError,
    PartitionError,
    QuadratureConfig,
    SamplingConfig,
    agglomerate,
    dirichlet_mode,
    ep_auto,
    ep_batch,
    ep_bivariate,
    ep_integrand,
    ep_integration,
    ep_sampling,
    poll_posterior,
    posterior_from_counts,
    sample_dirichlet,
    sample_gamma,
    threshold_probability,
)
from direp.special import reg_lower_inc_gamma

ELECTION_2005 = [534, 443, 92, 92, 105, 40]
ELECTION_2013 = [401, 331, 51, 131, 31, 61]
BLOCKS_2013 = [[0, 2], [1, 3], [4, 5]]


def scipy_ep(alpha):
    """Independent route: scipy's gammainc inside scipy's QUADPACK."""
    alpha = np.asarray(alpha, float)
    out = []
    for j, aj in enumerate(alpha):
        others = np.delete(alpha, j)

        def f(q):
            return np.prod(sps.gammainc(others, q)) * math.exp(
                (aj - 1) * math.log(q) - q - sps.gammaln(aj))

        out.append(spi.quad(f, 0, aj, epsabs=1e-13, limit=200)[0]
                   + spi.quad(f, aj, np.inf, epsabs=1e-13, limit=200)[0])
    return np.array(out)


class TestBivariate:
    def test_flat(self):
        np.testing.assert_allclose(ep_bivariate([1, 1]).phi, [0.5, 0.5], atol=1e-15)

    def test_two_one(self):
        # P(r1 > 1/2) under density 2 r1 is 1 - 1/4
        np.testing.assert_allclose(ep_bivariate([2, 1]).phi, [0.75, 0.25], atol=1e-14)

    @pytest.mark.parametrize("a", [0.5, 3, 100])
    def test_symmetric(self, a):
        np.testing.assert_allclose(ep_bivariate([a, a]).phi, [0.5, 0.5], atol=1e-12)

    def test_complement_exact(self):
        ev = ep_bivariate([3.7, 1.2])
        assert ev.phi[1] == 1.0 - ev.phi[0]
        assert ev.method == "closed_form"

    def test_wrong_k(self):
        with pytest.raises(ValueError):
            ep_bivariate([1, 2, 3])


class TestIntegrand:
    def test_empty_product_is_density(self):
        for q in [0.3, 2.0, 7.5]:
            assert ep_integrand(q, 2.5, []) == pytest.approx(
                math.exp(1.5 * math.log(q) - q - math.lgamma(2.5)), rel=1e-13)

    def test_origin(self):
        assert ep_integrand(0, 2, [3, 4]) == 0.0

    def test_exponential_pair(self):
        oracle = (1 - math.exp(-5)) * math.exp(-5)
        assert oracle == pytest.approx(0.006692547, abs=1e-9)
        assert ep_integrand(5, 1, [1]) == pytest.approx(oracle, rel=1e-13)

    def test_large_shapes_do_not_overflow(self):
        q = np.linspace(400, 700, 31)
        vals = ep_integrand(q, 534, [443, 92, 92, 105, 40])
        assert np.all(np.isfinite(vals)) and np.all(vals >= 0)

    def test_vectorized_shape(self):
        assert ep_integrand(np.ones((2, 3)), 2, [1]).shape == (2, 3)

    def test_domain(self):
        with pytest.raises(DomainError):
            ep_integrand(-1, 2, [1])


class TestIntegration:
    def test_uniform_four(self):
        np.testing.assert_allclose(ep_integration([1, 1, 1, 1]).phi, 0.25, atol=1e-8)

    def test_election_2005(self):
        phi = ep_integration(ELECTION_2005).phi
        assert abs(phi[0] - 0.9982) <= 5e-4
        assert abs(phi[1] - 0.0018) <= 5e-4
        assert np.all(phi[2:] < 1e-4)

    def test_election_2013_blocks(self):
        phi = ep_integration([452, 462, 92]).phi
        np.testing.assert_allclose(phi, [0.3704, 0.6296, 0.0], atol=5e-4)

    @pytest.mark.parametrize("alpha", [
        ELECTION_2005, [452, 462, 92], [2, 2, 2], [0.5, 3, 7.5], [0.6, 0.7, 0.8, 0.9], [12, 1.5, 30, 4, 4]])
    def test_against_scipy(self, alpha):
        np.testing.assert_allclose(ep_integration(alpha).phi, scipy_ep(alpha), atol=1e-9)

    def test_matches_closed_form_k2(self):
        for alpha in [[2, 1], [0.5, 0.7], [300, 310], [1, 50]]:
            np.testing.assert_allclose(
                ep_integration(alpha).phi, ep_bivariate(alpha).phi, atol=1e-8)

    def test_diagnostics(self):
        ev = ep_integration([3, 4, 5])
        assert ev.method == "integration"
        assert np.all(ev.error >= 0) and np.all(ev.error < 1e-7)
        assert abs(ev.sum_deviation) < 1e-8

    def test_convergence_failure_names_component(self):
        cfg = QuadratureConfig(abs_tol=1e-30, rel_tol=0, max_subdivisions=1)
        with pytest.raises(ConvergenceError) as info:
            ep_integration([3, 4, 5], cfg)
        assert info.value.component == 0
        assert "category 0" in str(info.value)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            ep_integration([3])


class TestSampling:
    def test_gamma_moments(self):
        x = sample_gamma(3.0, np.random.default_rng(11), size=100_000)
        assert abs(x.mean() - 3) < 0.05
        assert abs(x.var() - 3) < 0.15

    def test_gamma_ks_against_cdf(self):
        x = np.sort(sample_gamma(2.0, np.random.default_rng(12), size=100_000))
        cdf = np.array([reg_lower_inc_gamma(2.0, v) for v in x])
        n = x.size
        ks = max(np.max(np.arange(1, n + 1) / n - cdf), np.max(cdf - np.arange(n) / n))
        assert ks < 0.01

    @pytest.mark.parametrize("shape", [0.05, 0.3, 0.9])
    def test_gamma_small_shape_mean(self, shape):
        x = sample_gamma(shape, np.random.default_rng(13), size=200_000)
        assert abs(x.mean() - shape) < 5 * math.sqrt(shape / x.size)

    def test_gamma_scalar_and_deterministic(self):
        a = sample_gamma(4.0, np.random.default_rng(5))
        b = sample_gamma(4.0, np.random.default_rng(5))
        assert isinstance(a, float) and a == b > 0

    def test_gamma_broadcast(self):
        x = sample_gamma([1.0, 50.0], np.random.default_rng(1), size=(20_000, 2))
        assert x.shape == (20_000, 2)
        np.testing.assert_allclose(x.mean(axis=0), [1, 50], rtol=0.03)

    def test_dirichlet_sums_to_one(self):
        r = sample_dirichlet([1, 1, 1], np.random.default_rng(0))
        assert r.shape == (3,) and math.isclose(r.sum(), 1, abs_tol=1e-15)

    def test_dirichlet_mean(self):
        r = sample_dirichlet([2, 2, 4], np.random.default_rng(3), size=100_000)
        np.testing.assert_allclose(r.mean(axis=0), [0.25, 0.25, 0.5], atol=0.01)

    def test_dirichlet_single(self):
        assert sample_dirichlet([3.3], np.random.default_rng(0)).tolist() == [1.0]

    def test_dirichlet_tiny_alpha_resamples(self):
        r = sample_dirichlet([1e-3, 1e-3], np.random.default_rng(0), size=2000)
        np.testing.assert_allclose(r.sum(axis=1), 1, atol=1e-12)

    def test_ep_uniform(self):
        ev = ep_sampling([1, 1, 1], SamplingConfig(100_000, 7))
        np.testing.assert_allclose(ev.phi, 1 / 3, atol=0.006)
        assert ev.counts.sum() == 100_000
        assert math.fsum(ev.phi) == pytest.approx(1, abs=1e-15)

    def test_ep_two_one(self):
        assert ep_sampling([2, 1], SamplingConfig(100_000, 8)).phi[0] == pytest.approx(0.75, abs=0.006)

    def test_ep_election_vs_integration(self):
        S = 100_000
        ref = ep_integration(ELECTION_2005).phi
        ev = ep_sampling(ELECTION_2005, SamplingConfig(S, 9))
        assert np.all(np.abs(ev.phi - ref) <= 4 * np.sqrt(ref * (1 - ref) / S))
        np.testing.assert_allclose(ev.error, np.sqrt(ev.phi * (1 - ev.phi) / S))

    def test_ep_deterministic(self):
        a = ep_sampling([3, 2, 2, 1], SamplingConfig(50_000, 42))
        b = ep_sampling([3, 2, 2, 1], SamplingConfig(50_000, 42))
        assert np.array_equal(a.phi, b.phi)

    def test_ties_to_lowest_index(self):
        # alpha so small that gamma draws underflow to exact zeros in most components
        ev = ep_sampling([1e-4, 1e-4, 1e-4], SamplingConfig(2000, 1))
        assert ev.counts.sum() == 2000

    def test_config(self):
        assert SamplingConfig().samples == 1_000_000
        with pytest.raises(ValueError):
            SamplingConfig(0, 1)
        with pytest.raises(ValueError):
            SamplingConfig(10, -1)


class TestAuto:
    def test_single(self):
        assert ep_auto([7]).phi.tolist() == [1.0]

    def test_pair_closed_form(self):
        ev = ep_auto([3, 3])
        assert ev.method == "closed_form"
        np.testing.assert_allclose(ev.phi, 0.5, atol=1e-12)

    def test_three_integration(self):
        ev = ep_auto([1, 1, 1])
        assert ev.method == "integration"
        np.testing.assert_allclose(ev.phi, 1 / 3, atol=1e-8)

    def test_rejects_bad_alpha(self):
        for bad in ([], [1, 0], [1, -2], [1, np.nan]):
            with pytest.raises(DomainError):
                ep_auto(bad)


class TestInvariants:
    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(0.5, 300), min_size=3, max_size=7), st.randoms(use_true_random=False))
    def test_permutation_equivariance(self, alpha, rnd):
        perm = list(range(len(alpha)))
        rnd.shuffle(perm)
        base = ep_auto(alpha).phi
        permuted = ep_auto([alpha[i] for i in perm]).phi
        np.testing.assert_allclose(permuted, base[perm], atol=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(0.5, 1000), min_size=2, max_size=12))
    def test_normalization(self, alpha):
        assert abs(ep_auto(alpha).sum_deviation) <= 1e-6

    @pytest.mark.parametrize("k", [3, 5, 12])
    @pytest.mark.parametrize("a", [0.5, 4, 250])
    def test_symmetry(self, k, a):
        np.testing.assert_allclose(ep_integration([a] * k).phi, 1 / k, atol=1e-8)

    def test_monotone_in_own_alpha(self):
        others = [3.0, 5.0, 2.0]
        phis = [ep_integration([a] + others).phi[0] for a in np.linspace(0.5, 20, 40)]
        assert np.all(np.diff(phis) >= -1e-9)

    @pytest.mark.parametrize("alpha", [[2, 2, 2], [1.5, 3, 2.5, 4], [10, 9, 8, 2, 2]])
    def test_max_exceeds_half_threshold(self, alpha):
        phi = ep_integration(alpha).phi
        for j in range(len(alpha)):
            assert phi[j] > threshold_probability(alpha, j, 0.5)

    def test_agglomeration_matches_grouped_sampling(self):
        alpha = np.array([4.0, 2.0, 3.0, 5.0, 1.5])
        groups = [[0, 1], [2, 4], [3]]
        ep = ep_auto(agglomerate(alpha, groups)).phi
        S = 200_000
        r = sample_dirichlet(alpha, np.random.default_rng(77), size=S)
        grouped = np.stack([r[:, g].sum(axis=1) for g in groups], axis=1)
        freq = np.bincount(np.argmax(grouped, axis=1), minlength=3) / S
        assert np.all(np.abs(freq - ep) <= 4 * np.sqrt(ep * (1 - ep) / S))


class TestAgglomerate:
    def test_election_blocks(self):
        assert agglomerate(ELECTION_2013, BLOCKS_2013).tolist() == [452, 462, 92]

    def test_identity(self):
        a = [0.5, 2, 9]
        assert agglomerate(a, [[0], [1], [2]]).tolist() == a

    def test_full_sum(self):
        assert agglomerate([1, 2, 3], [[0, 1, 2]]).tolist() == [6]

    def test_one_based(self):
        assert agglomerate(ELECTION_2013, [[1, 3], [2, 4], [5, 6]], base=1).tolist() == [452, 462, 92]

    @pytest.mark.parametrize("groups,needle", [
        ([[0, 1], [1, 2]], "duplicated indices: [1]"),
        ([[0], [2]], "missing indices: [1]"),
        ([[0, 1, 2], []], "empty groups"),
        ([[0, 1, 2, 3]], "out of range"),
    ])
    def test_invalid(self, groups, needle):
        with pytest.raises(PartitionError, match=re_escape(needle)):
            agglomerate([1, 2, 3], groups)


def re_escape(s):
    import re
    return re.escape(s)


class TestPosterior:
    def test_poll_2005(self):
        alpha = poll_posterior([41, 34, 7, 7, 8, 3], 1299, round_result=True)
        assert alpha.tolist() == ELECTION_2005

    def test_poll_2013(self):
        alpha = poll_posterior([40, 33, 5, 13, 3, 6], 1001, round_result=True)
        assert alpha.tolist() == ELECTION_2013

    def test_unrounded(self):
        alpha = poll_posterior([41, 34, 7, 7, 8, 3], 1299)
        np.testing.assert_allclose(alpha, 1 + np.array([41, 34, 7, 7, 8, 3]) / 100 * 1299)

    def test_zero_counts(self):
        assert posterior_from_counts([1.5, 2.5], [0, 0]).tolist() == [1.5, 2.5]

    def test_half_rounds_away_from_zero(self):
        assert posterior_from_counts([1, 1], [0.5, 1.5], round_result=True).tolist() == [2, 3]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            posterior_from_counts([1, 1], [1, 2, 3])

    def test_negative_counts(self):
        with pytest.raises(DomainError):
            posterior_from_counts([1, 1], [1, -2])


class TestModeAndThreshold:
    def test_mode_symmetric(self):
        np.testing.assert_allclose(dirichlet_mode([2, 2]), [0.5, 0.5])

    def test_mode_election(self):
        assert dirichlet_mode(ELECTION_2005)[0] == pytest.approx(533 / 1300, rel=1e-15)

    def test_mode_two_three(self):
        np.testing.assert_allclose(dirichlet_mode([2, 3]), [1 / 3, 2 / 3], rtol=1e-15)

    def test_mode_undefined(self):
        with pytest.raises(ModeUndefinedError):
            dirichlet_mode([2, 1, 3])

    def test_threshold_limits(self):
        assert threshold_probability([2, 5, 1], 1, 0) == 1.0
        assert threshold_probability([2, 5, 1], 1, 1) == 0.0

    def test_threshold_beta24(self):
        # Beta(2, 4) upper tail at 1/2: 1 - (1 - 13/16)
        assert threshold_probability([2, 2, 2], 0, 0.5) == pytest.approx(0.1875, abs=1e-14)

    def test_threshold_symmetric(self):
        assert threshold_probability([3, 3], 0, 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_threshold_index(self):
        with pytest.raises(IndexError):
            threshold_probability([1, 2], 2, 0.5)


class TestBatch:
    def test_auto_rows_keep_order_and_length(self):
        rows = [[1, 1], [534, 443, 92, 92, 105, 40], [7]]
        out = ep_batch(rows)
        assert [len(ev) for ev in out] == [2, 6, 1]

    def test_sampling_row_seed_independent_of_other_rows(self):
        a = ep_batch([[2, 3, 4], [1, 1, 1]], "sampling", samples=20_000, seed=3)
        b = ep_batch([[2, 3, 4], [9, 1, 1, 1]], "sampling", samples=20_000, seed=3)
        assert np.array_equal(a[0].phi, b[0].phi)

    def test_sampling_needs_seed(self):
        with pytest.raises(ValueError):
            ep_batch([[1, 2]], "sampling")

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            ep_batch([[1, 2]], "magic")


def test_blocks_against_large_sample_reference():
    # published values are rounded to 0.01 %; a 10^7-draw sample pins them further
    S = 10_000_000
    ref = ep_sampling([452, 462, 92], SamplingConfig(S, 2013)).phi
    phi = ep_integration([452, 462, 92]).phi
    assert np.all(np.abs(phi - ref) <= 4 * np.sqrt(phi * (1 - phi) / S))
