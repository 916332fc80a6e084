"""Statistics, thresholds, mixtures, and decision rules against density
oracles.

scipy.stats.multivariate_normal supplies the component densities and
scipy.special.logsumexp the mixture combination; one extended-precision check
goes through mpmath. The linear and quadratic statistics are validated by
verdict equivalence with densities evaluated directly, which pins the
statistic-threshold pairs to the underlying likelihood-ratio tests.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from scipy import stats
from scipy.special import logsumexp

from ccdet import (
    Decision,
    DimensionError,
    DomainError,
    GaussianMixture,
    InjectionPolicy,
    ProbabilityError,
    RngContract,
    Scenario,
    SignalModel,
    SingularCovarianceError,
    build_mixtures,
    compress,
    eve_decide,
    fc_decide_with_byzantines,
    fc_statistic_deterministic,
    fc_statistic_random,
    fc_threshold_deterministic,
    fc_threshold_random,
    gen_projection,
    mixture_loglik,
)


def _mixture(seed=0, k=3, dim=4) -> GaussianMixture:
    rng = np.random.default_rng(seed)
    weights = rng.random(k)
    weights /= weights.sum()
    means = rng.standard_normal((k, dim))
    a = rng.standard_normal((dim, dim + 2))
    cov = a @ a.T + 0.5 * np.eye(dim)
    return GaussianMixture(weights=weights, means=means, cov=cov)


def test_mixture_validation():
    good = _mixture()
    assert good.num_components == 3
    assert good.dim == 4
    with pytest.raises(ProbabilityError):
        GaussianMixture(np.array([0.7, 0.7]), np.zeros((2, 2)), np.eye(2))
    with pytest.raises(ProbabilityError):
        GaussianMixture(np.array([-0.2, 1.2]), np.zeros((2, 2)), np.eye(2))
    with pytest.raises(DimensionError):
        GaussianMixture(np.array([0.5, 0.5]), np.zeros((3, 2)), np.eye(2))
    with pytest.raises(DimensionError):
        GaussianMixture(np.array([1.0]), np.zeros((1, 2)), np.eye(3))
    with pytest.raises(SingularCovarianceError):
        GaussianMixture(np.array([1.0]), np.zeros((1, 2)), np.zeros((2, 2)))
    skew = np.eye(2)
    skew[0, 1] = 0.5
    with pytest.raises(SingularCovarianceError):
        GaussianMixture(np.array([1.0]), np.zeros((1, 2)), skew)


def test_mixture_copies_and_freezes_inputs():
    weights = np.array([0.5, 0.5])
    means = np.zeros((2, 3))
    cov = np.eye(3)
    mix = GaussianMixture(weights, means, cov)
    weights[0] = 0.9
    means[0, 0] = 5.0
    cov[0, 0] = 7.0
    assert mix.weights[0] == 0.5
    assert mix.means[0, 0] == 0.0
    assert mix.cov[0, 0] == 1.0
    with pytest.raises(ValueError):
        mix.weights[0] = 0.1


def test_component_logpdfs_match_scipy():
    mix = _mixture(seed=5)
    ys = np.random.default_rng(6).standard_normal((8, 4))
    got = mix.component_logpdfs(ys)
    for k in range(mix.num_components):
        expected = stats.multivariate_normal.logpdf(ys, mix.means[k], mix.cov)
        assert np.allclose(got[:, k], expected, rtol=1e-11, atol=1e-11)
    with pytest.raises(DimensionError):
        mix.component_logpdfs(np.ones((2, 3)))


def test_loglik_rows_match_scipy_logsumexp():
    mix = _mixture(seed=7)
    ys = np.random.default_rng(8).standard_normal((10, 4)) * 3.0
    parts = np.stack(
        [
            stats.multivariate_normal.logpdf(ys, mix.means[k], mix.cov)
            for k in range(mix.num_components)
        ],
        axis=1,
    )
    expected = logsumexp(parts + np.log(mix.weights)[None, :], axis=1)
    assert np.allclose(mix.loglik_rows(ys), expected, rtol=1e-11, atol=1e-11)


def test_loglik_single_component_is_plain_logpdf():
    cov = np.array([[2.0, 0.3], [0.3, 1.0]])
    mix = GaussianMixture(np.array([1.0]), np.array([[1.0, -1.0]]), cov)
    y = np.array([0.2, 0.7])
    expected = stats.multivariate_normal.logpdf(y, mix.means[0], cov)
    assert mix.loglik(y) == pytest.approx(expected, rel=1e-12)
    assert mixture_loglik(y, mix) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DimensionError):
        mix.loglik(np.ones((2, 2)))


def test_loglik_far_tail_is_stable():
    # naive exp-sum underflows here; the max-shifted form must not
    mix = GaussianMixture(
        np.array([0.9, 0.1]),
        np.array([[0.0, 0.0], [1.0, 1.0]]),
        np.eye(2),
    )
    y = np.array([60.0, 60.0])
    value = mix.loglik(y)
    assert math.isfinite(value)
    # the closer component dominates; its term alone is a tight lower bound
    dominant = stats.multivariate_normal.logpdf(y, mix.means[1], mix.cov) + math.log(0.1)
    assert value >= dominant
    assert value == pytest.approx(dominant, rel=1e-6)


def test_loglik_matches_mpmath_reference():
    mix = GaussianMixture(
        np.array([0.6, 0.3, 0.1]),
        np.array([[0.0, 0.0], [2.0, -1.0], [-3.0, 4.0]]),
        np.array([[1.5, 0.4], [0.4, 0.8]]),
    )
    y = np.array([8.0, -5.0])
    cov_inv = np.linalg.inv(mix.cov)
    log_norm = -0.5 * (2 * math.log(2 * math.pi) + math.log(np.linalg.det(mix.cov)))
    with mpmath.workdps(60):
        total = mpmath.mpf(0)
        for w, mean in zip(mix.weights, mix.means):
            d = y - mean
            quad = float(d @ cov_inv @ d)
            total += mpmath.mpf(float(w)) * mpmath.e ** (
                mpmath.mpf(log_norm) - mpmath.mpf(quad) / 2
            )
        expected = float(mpmath.log(total))
    assert mix.loglik(y) == pytest.approx(expected, rel=1e-12)


def test_decision_tie_goes_to_null():
    assert Decision(statistic=1.0, threshold=1.0).verdict == "H0"
    assert Decision(statistic=1.0 + 1e-12, threshold=1.0).verdict == "H1"
    assert Decision(statistic=0.5, threshold=1.0).verdict == "H0"


def test_compress_module_function_checks_shape():
    op = gen_projection(3, 6, RngContract(1, 2**62))
    u = np.arange(6.0)
    assert np.allclose(compress(op, u), op.phi @ u)
    with pytest.raises(DimensionError):
        compress(op, np.ones(5))
    with pytest.raises(DimensionError):
        compress(op, np.ones((2, 6)))


def test_fc_statistic_deterministic_matches_brute_force():
    op = gen_projection(4, 9, RngContract(2, 2**62))
    rng = np.random.default_rng(3)
    s = rng.standard_normal(9)
    ys = rng.standard_normal((5, 4))
    template = np.linalg.solve(op.gram, op.phi @ s)
    expected = float(sum(y @ template for y in ys))
    assert fc_statistic_deterministic(ys, op, s) == pytest.approx(expected, rel=1e-11)
    with pytest.raises(DimensionError):
        fc_statistic_deterministic(ys, op, np.ones(4))
    with pytest.raises(DimensionError):
        fc_statistic_deterministic(np.ones((5, 3)), op, s)


def test_fc_threshold_deterministic_is_half_projected_energy():
    op = gen_projection(4, 9, RngContract(4, 2**62))
    s = np.random.default_rng(5).standard_normal(9)
    p_hat = op.phi.T @ np.linalg.solve(op.gram, op.phi)
    expected = 0.5 * 7 * float(s @ p_hat @ s)
    assert fc_threshold_deterministic(op, s, 7) == pytest.approx(expected, rel=1e-11)
    with pytest.raises(DimensionError):
        fc_threshold_deterministic(op, s, 0)


def test_deterministic_verdict_equals_density_ratio_test():
    # statistic > threshold must coincide with sum of per-node log density
    # ratios (signal-mean versus zero-mean Gaussians) being positive
    op = gen_projection(3, 8, RngContract(6, 2**62))
    s = np.random.default_rng(7).standard_normal(8) * 0.7
    beta_inv = 1.3
    cov = beta_inv * op.gram
    mean1 = op.phi @ s
    n = 4
    threshold = fc_threshold_deterministic(op, s, n)
    rng = np.random.default_rng(8)
    for _ in range(25):
        ys = rng.multivariate_normal(np.zeros(3), cov, size=n) + (
            mean1 if rng.random() < 0.5 else 0.0
        )
        llr = float(
            stats.multivariate_normal.logpdf(ys, mean1, cov).sum()
            - stats.multivariate_normal.logpdf(ys, np.zeros(3), cov).sum()
        )
        statistic = fc_statistic_deterministic(ys, op, s)
        # identity: statistic - threshold = beta_inv * summed log ratio
        assert statistic - threshold == pytest.approx(beta_inv * llr, rel=1e-8, abs=1e-9)
        assert (statistic > threshold) == (llr > 0.0)


def _random_model(p=8, mean_scale=0.4, alpha_inv=0.9, beta_inv=1.4) -> SignalModel:
    mean = mean_scale * np.linspace(-1.0, 1.0, p)
    return SignalModel(
        ambient_dim=p, mean=mean, signal_variance=alpha_inv, noise_variance=beta_inv
    )


def test_fc_statistic_random_matches_brute_force():
    op = gen_projection(3, 8, RngContract(9, 2**62))
    model = _random_model()
    ys = np.random.default_rng(10).standard_normal((5, 3))
    gram_inv = np.linalg.inv(op.gram)
    proj_mean = op.phi @ model.mean
    ratio = model.signal_variance / model.noise_variance
    expected = ratio * float(np.einsum("ij,jk,ik->", ys, gram_inv, ys)) + 2.0 * float(
        ys.sum(axis=0) @ gram_inv @ proj_mean
    )
    assert fc_statistic_random(ys, op, model) == pytest.approx(expected, rel=1e-10)
    deterministic = SignalModel(8, model.mean, 0.0, 1.0)
    with pytest.raises(DomainError):
        fc_statistic_random(ys, op, deterministic)


def test_fc_threshold_random_uses_realized_energy():
    op = gen_projection(3, 8, RngContract(11, 2**62))
    model = _random_model()
    a, b = model.signal_variance, model.noise_variance
    energy = op.projector_energy(model.mean)
    n = 6
    expected = (a + b) * (n * 3 * math.log1p(a / b)) + n * energy
    assert fc_threshold_random(model, 3, n, op) == pytest.approx(expected, rel=1e-12)
    skewed = fc_threshold_random(model, 3, n, op, priors=(0.8, 0.2))
    assert skewed - expected == pytest.approx((a + b) * 2.0 * math.log(4.0), rel=1e-11)
    with pytest.raises(DimensionError):
        fc_threshold_random(model, 4, n, op)


def test_random_verdict_equals_density_ratio_test():
    # the quadratic statistic against its threshold must decide exactly like
    # the Gaussian density ratio with covariances (a+b) G versus b G
    op = gen_projection(3, 8, RngContract(12, 2**62))
    model = _random_model()
    a, b = model.signal_variance, model.noise_variance
    mean1 = op.phi @ model.mean
    cov0 = b * op.gram
    cov1 = (a + b) * op.gram
    n = 4
    rng = np.random.default_rng(13)
    for priors in ((0.5, 0.5), (0.75, 0.25)):
        threshold = fc_threshold_random(model, 3, n, op, priors)
        log_prior = math.log(priors[0] / priors[1])
        for _ in range(25):
            if rng.random() < 0.5:
                ys = rng.multivariate_normal(np.zeros(3), cov0, size=n)
            else:
                ys = rng.multivariate_normal(mean1, cov1, size=n)
            llr = float(
                stats.multivariate_normal.logpdf(ys, mean1, cov1).sum()
                - stats.multivariate_normal.logpdf(ys, np.zeros(3), cov0).sum()
            )
            statistic = fc_statistic_random(ys, op, model)
            assert (statistic > threshold) == (llr > log_prior)


def _injection_scenario(p=6, m=3, n=5, fraction=0.3, kappa=1.0, art_variance=0.4):
    model = SignalModel(
        ambient_dim=p,
        mean=0.8 * np.ones(p),
        signal_variance=0.7,
        noise_variance=1.1,
    )
    policy = InjectionPolicy(
        fraction=fraction,
        p10=0.8,
        p20=0.1,
        p11=0.1,
        p21=0.8,
        kappa=kappa,
        art_variance=art_variance,
    )
    return Scenario(
        model=model, compressed_dim=m, num_nodes=n, seed=17, injection=policy
    )


def test_build_mixtures_structure():
    scenario = _injection_scenario()
    op = gen_projection(3, 6, RngContract(scenario.seed, 2**62))
    mixtures = build_mixtures(scenario, op)
    model = scenario.model
    policy = scenario.injection
    proj_mean = op.phi @ model.mean
    offset = policy.kappa * proj_mean

    h0, h1 = mixtures.fc_byz
    assert np.allclose(h0.weights, [0.8, 0.1, 0.1])
    assert np.allclose(h1.weights, [0.1, 0.8, 0.1])
    assert np.allclose(h0.means, np.stack([offset, -offset, np.zeros(3)]))
    assert np.allclose(
        h1.means, np.stack([proj_mean + offset, proj_mean - offset, proj_mean])
    )
    assert np.allclose(h0.cov, (0.4 + 1.1) * op.gram)
    assert np.allclose(h1.cov, (0.7 + 0.4 + 1.1) * op.gram)

    e0, e1 = mixtures.eve
    assert np.allclose(e0.weights, [0.24, 0.03, 0.73])
    assert np.allclose(e1.weights, [0.03, 0.24, 0.73])
    assert np.allclose(e0.means, h0.means)
    assert np.allclose(e0.cov, h0.cov)

    c0, c1 = mixtures.clean
    assert c0.num_components == c1.num_components == 1
    assert np.allclose(c0.means[0], np.zeros(3))
    assert np.allclose(c1.means[0], proj_mean)
    assert np.allclose(c0.cov, 1.1 * op.gram)
    assert np.allclose(c1.cov, (0.7 + 1.1) * op.gram)


def test_build_mixtures_requires_policy_and_matching_dims():
    scenario = _injection_scenario()
    clean = Scenario(
        model=scenario.model, compressed_dim=3, num_nodes=5, seed=17, injection=None
    )
    op = gen_projection(3, 6, RngContract(17, 2**62))
    with pytest.raises(DomainError):
        build_mixtures(clean, op)
    mismatched = gen_projection(2, 6, RngContract(17, 2**62))
    with pytest.raises(DimensionError):
        build_mixtures(scenario, mismatched)


def _scipy_mixture_loglik(ys, weights, means, cov):
    parts = np.stack(
        [stats.multivariate_normal.logpdf(ys, mean, cov) for mean in means], axis=-1
    )
    return logsumexp(np.atleast_2d(parts) + np.log(weights)[None, :], axis=1)


def test_fc_decide_with_byzantines_matches_density_oracle():
    scenario = _injection_scenario()
    op = gen_projection(3, 6, RngContract(scenario.seed, 2**62))
    mixtures = build_mixtures(scenario, op)
    flags = np.array([True, True, False, False, False])
    rng = np.random.default_rng(21)
    for _ in range(20):
        ys = rng.standard_normal((5, 3)) * 2.0
        decision = fc_decide_with_byzantines(ys, flags, mixtures, priors=(0.6, 0.4))
        byz1 = _scipy_mixture_loglik(
            ys[:2], mixtures.fc_byz[1].weights, mixtures.fc_byz[1].means, mixtures.fc_byz[1].cov
        )
        byz0 = _scipy_mixture_loglik(
            ys[:2], mixtures.fc_byz[0].weights, mixtures.fc_byz[0].means, mixtures.fc_byz[0].cov
        )
        clean1 = stats.multivariate_normal.logpdf(
            ys[2:], mixtures.clean[1].means[0], mixtures.clean[1].cov
        )
        clean0 = stats.multivariate_normal.logpdf(
            ys[2:], mixtures.clean[0].means[0], mixtures.clean[0].cov
        )
        expected = float(byz1.sum() - byz0.sum() + clean1.sum() - clean0.sum())
        assert decision.statistic == pytest.approx(expected, rel=1e-9, abs=1e-10)
        assert decision.threshold == pytest.approx(math.log(1.5), rel=1e-12)
        assert decision.verdict == ("H1" if expected > math.log(1.5) else "H0")


def test_fc_decide_flag_routing():
    # a wildly offset observation must be scored by the mixture its flag names
    scenario = _injection_scenario(kappa=3.0, art_variance=0.0)
    op = gen_projection(3, 6, RngContract(scenario.seed, 2**62))
    mixtures = build_mixtures(scenario, op)
    y_at_offset = (op.phi @ scenario.model.mean) * (1.0 + 3.0)
    ys = np.stack([y_at_offset, np.zeros(3)])
    flagged = fc_decide_with_byzantines(ys, np.array([True, False]), mixtures)
    unflagged = fc_decide_with_byzantines(ys, np.array([False, True]), mixtures)
    assert flagged.statistic != unflagged.statistic
    with pytest.raises(DimensionError):
        fc_decide_with_byzantines(ys, np.array([True]), mixtures)


def test_eve_decide_matches_density_oracle():
    scenario = _injection_scenario()
    op = gen_projection(3, 6, RngContract(scenario.seed, 2**62))
    mixtures = build_mixtures(scenario, op)
    rng = np.random.default_rng(22)
    ys = rng.standard_normal((5, 3)) * 1.5
    decision = eve_decide(ys, mixtures)
    ev1 = _scipy_mixture_loglik(
        ys, mixtures.eve[1].weights, mixtures.eve[1].means, mixtures.eve[1].cov
    )
    ev0 = _scipy_mixture_loglik(
        ys, mixtures.eve[0].weights, mixtures.eve[0].means, mixtures.eve[0].cov
    )
    expected = float(ev1.sum() - ev0.sum())
    assert decision.statistic == pytest.approx(expected, rel=1e-9, abs=1e-10)
    assert decision.threshold == 0.0
