import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import boundaryboot.constrained_ls as cls_mod
from boundaryboot.constrained_ls import (
    BoundaryNull,
    ConstraintSpec,
    FitResult,
    NewtonConvergenceError,
    SimpleNull,
    SingularDesignError,
    SmoothNull,
    fit_constrained,
    fit_unconstrained,
    minimize_quadratic_on_constraint,
    statistic_value,
    validate_hypothesis,
)
from boundaryboot.dgp import Fixed, IidNormal, TimeSeriesSample, UnitRoot, generate_sample
from boundaryboot.rng import derive_stream


def make_sample(n=40, seed=0, truth=(0.0, 0.0)):
    return generate_sample(UnitRoot(), IidNormal(), Fixed(truth), n, derive_stream(seed))


def manual_sample(y, x):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return TimeSeriesSample(y=y, x=x, n=y.size, resolved_theta=np.zeros(2))


def profile_rss(sample, theta):
    """RSS in theta after concentrating out the regressor-difference slope."""
    z = np.column_stack([np.ones(sample.n), sample.x_lag])
    d = sample.dx
    r = sample.y - z @ np.asarray(theta)
    r = r - d * (d @ r) / (d @ d)
    return float(r @ r)


SLOPE = ConstraintSpec.nonnegative_slope()


def test_constant_response_interpolates():
    x = derive_stream(1).standard_normal(13)
    sample = manual_sample(np.full(12, 3.5), x)
    fit = fit_unconstrained(sample)
    assert_allclose(fit.theta_hat, [3.5, 0.0], atol=1e-10)
    assert_allclose(fit.residuals, 0.0, atol=1e-10)


def test_matches_normal_equations_on_hand_dataset():
    x = np.array([0.0, 0.4, -0.3, 0.9, 1.2, 0.1, -0.5])
    y = np.array([1.0, 0.2, -0.7, 2.1, 0.5, 1.3])
    sample = manual_sample(y, x)
    fit = fit_unconstrained(sample)
    design = np.column_stack([np.ones(6), x[:-1], np.diff(x)])
    beta = np.linalg.solve(design.T @ design, design.T @ y)
    assert_allclose(fit.theta_hat, beta[:2], atol=1e-10)
    assert_allclose(fit.delta_hat, beta[2], atol=1e-10)


def test_frisch_waugh_partialling_identity():
    sample = make_sample(seed=4)
    fit = fit_unconstrained(sample, include_delta=True)
    z = np.column_stack([np.ones(sample.n), sample.x_lag])
    d = sample.dx
    proj = np.eye(sample.n) - np.outer(d, d) / (d @ d)
    theta_partial = np.linalg.lstsq(proj @ z, proj @ sample.y, rcond=None)[0]
    assert_allclose(fit.theta_hat, theta_partial, atol=1e-10)


def test_slack_constraint_returns_unconstrained_fit():
    sample = make_sample(seed=2, truth=(0.0, 1.0))
    unc = fit_unconstrained(sample)
    assert unc.theta_hat[1] > 0
    fit = fit_constrained(sample, SLOPE)
    assert not fit.constraint_active
    assert fit.multiplier == 0.0
    assert_allclose(fit.theta_hat, unc.theta_hat, rtol=0, atol=0)


def _negative_slope_sample():
    for seed in range(100):
        sample = make_sample(seed=seed)
        if fit_unconstrained(sample).theta_hat[1] < -0.05:
            return sample
    raise AssertionError("no negative-slope draw found")


def test_binding_slope_matches_restricted_regression():
    sample = _negative_slope_sample()
    fit = fit_constrained(sample, SLOPE)
    assert fit.constraint_active
    assert abs(fit.theta_hat[1]) < 1e-12
    # slope forced to zero: intercept comes from regressing y on (1, dx)
    design = np.column_stack([np.ones(sample.n), sample.dx])
    beta = np.linalg.lstsq(design, sample.y, rcond=None)[0]
    assert_allclose(fit.theta_hat[0], beta[0], atol=1e-10)
    assert fit.multiplier > 0


def test_binding_affine_fit_beats_random_feasible_probes():
    constraint = ConstraintSpec.from_affine((1.0, 2.0), 1.0)
    sample = make_sample(seed=3)  # fit near zero, well inside g < 0
    fit = fit_constrained(sample, constraint)
    assert fit.constraint_active
    rss_hat = profile_rss(sample, fit.theta_hat)
    rng = derive_stream(202)
    a = np.array([1.0, 2.0])
    boundary_pt = a / (a @ a)  # g = 0 here
    probes = boundary_pt + rng.standard_normal((10_000, 2)) * 2.0
    probes += np.maximum(0.0, -(probes @ a - 1.0))[:, None] * a / (a @ a)  # make feasible
    assert np.all(probes @ a - 1.0 >= -1e-9)
    for theta in probes[:200]:
        assert rss_hat <= profile_rss(sample, theta) + 1e-9
    # spot-check the full probe cloud through the quadratic expansion
    z = np.column_stack([np.ones(sample.n), sample.x_lag])
    d = sample.dx
    gram = z.T @ z - np.outer(z.T @ d, z.T @ d) / (d @ d)
    diffs = probes - fit.theta_tilde
    rss_all = profile_rss(sample, fit.theta_tilde) + np.einsum(
        "ij,jk,ik->i", diffs, gram, diffs
    )
    assert np.all(rss_hat <= rss_all + 1e-8)


def test_statistic_value_examples():
    dummy = FitResult(
        theta_hat=np.array([0.3, 0.1]),
        theta_tilde=np.array([0.3, 0.1]),
        delta_hat=None,
        residuals=np.zeros(4),
        m_n=np.eye(2),
        sigma_e2_hat=0.0,
        constraint_active=False,
        multiplier=0.0,
        threshold=0.0,
        g_hat=0.1,
    )
    hyp = SmoothNull(h=lambda t: t[..., 0] + t[..., 1], grad_h=lambda t: np.ones(2))
    assert statistic_value(dummy, hyp, 100) == pytest.approx(16.0)
    zero = FitResult(
        theta_hat=np.zeros(2),
        theta_tilde=np.zeros(2),
        delta_hat=None,
        residuals=np.zeros(4),
        m_n=np.eye(2),
        sigma_e2_hat=0.0,
        constraint_active=False,
        multiplier=0.0,
        threshold=0.0,
        g_hat=0.0,
    )
    assert statistic_value(zero, hyp, 50) == 0.0
    # bootstrap centering at the original estimate gives zero
    assert statistic_value(dummy, hyp, 1000, reference=0.4) == pytest.approx(0.0)
    assert statistic_value(dummy, BoundaryNull(), 100) == pytest.approx(1.0)
    assert statistic_value(dummy, SimpleNull(np.array([0.3, 0.1])), 77) == 0.0


def test_validate_hypothesis_checks_boundary_point():
    validate_hypothesis(SimpleNull(np.array([2.0, 0.0])), SLOPE)
    with pytest.raises(ValueError):
        validate_hypothesis(SimpleNull(np.array([0.0, 0.5])), SLOPE)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    threshold=st.floats(min_value=-0.5, max_value=0.5),
)
def test_kkt_invariants(seed, threshold):
    sample = make_sample(n=30, seed=seed)
    unc = fit_unconstrained(sample)
    fit = fit_constrained(sample, SLOPE, threshold=threshold)
    assert fit.constraint_active == (unc.theta_hat[1] < threshold)
    assert fit.g_hat >= threshold - 1e-8
    assert fit.multiplier >= 0.0
    assert abs(fit.multiplier * (fit.g_hat - fit.threshold)) <= 1e-6
    assert fit.sigma_e2_hat >= 0.0
    assert np.linalg.eigvalsh(fit.m_n)[0] > 0.0


def test_rescaling_equivariance():
    for a in (2.0, 3.7):
        sample = _negative_slope_sample()
        scaled = TimeSeriesSample(
            y=sample.y, x=a * sample.x, n=sample.n, resolved_theta=sample.resolved_theta
        )
        fit = fit_constrained(sample, SLOPE)
        fit_a = fit_constrained(scaled, SLOPE)
        assert_allclose(fit_a.theta_hat[1], fit.theta_hat[1] / a, atol=1e-10)
        assert_allclose(fit_a.theta_hat[0], fit.theta_hat[0], atol=1e-10)
        assert_allclose(fit_a.residuals, fit.residuals, atol=1e-10)
        hyp = SmoothNull(h=lambda t: t[..., 0] + t[..., 1], grad_h=lambda t: np.ones(2))
        hyp_a = SmoothNull(
            h=lambda t: t[..., 0] + a * t[..., 1], grad_h=lambda t: np.array([1.0, a])
        )
        assert statistic_value(fit_a, hyp_a, sample.n) == pytest.approx(
            statistic_value(fit, hyp, sample.n), abs=1e-10
        )


def test_closed_form_matches_newton_on_random_instances():
    rng = derive_stream(404)
    for _ in range(1000):
        root = rng.standard_normal((2, 2))
        gram = root @ root.T + 0.1 * np.eye(2)
        center = rng.standard_normal(2)
        a = rng.standard_normal(2)
        while np.linalg.norm(a) < 0.1:
            a = rng.standard_normal(2)
        b = float(rng.standard_normal())
        threshold = float(a @ center - b) + abs(rng.standard_normal()) + 0.05
        affine = ConstraintSpec.from_affine(a, b)
        # same constraint without the affine tag forces the Newton route
        opaque = ConstraintSpec(
            g=lambda t, _a=a, _b=b: np.asarray(t) @ _a - _b,
            grad_g=lambda t, _a=a: _a.copy(),
        )
        closed = minimize_quadratic_over = minimize_quadratic_on_constraint(
            gram, center, affine, threshold
        )
        newton = minimize_quadratic_on_constraint(gram, center, opaque, threshold)
        assert np.max(np.abs(closed - newton)) < 1e-8


def test_nonlinear_constraint_boundary_solve():
    constraint = ConstraintSpec(
        g=lambda t: t[..., 1] - t[..., 0] ** 2,
        grad_g=lambda t: np.array([-2.0 * t[0], 1.0]),
    )
    sample = make_sample(seed=8)
    fit = fit_constrained(sample, constraint)
    if fit.constraint_active:
        theta = fit.theta_hat
        assert abs(theta[1] - theta[0] ** 2) < 1e-9
        # KKT stationarity against the profile objective
        z = np.column_stack([np.ones(sample.n), sample.x_lag])
        d = sample.dx
        gram = z.T @ z - np.outer(z.T @ d, z.T @ d) / (d @ d)
        grad_q = 2.0 * gram @ (theta - fit.theta_tilde) / sample.n
        grad_g = np.array([-2.0 * theta[0], 1.0])
        resid = grad_q - fit.multiplier * grad_g
        assert np.max(np.abs(resid)) < 1e-8
        # no feasible point along the boundary does better
        ts = np.linspace(theta[0] - 0.5, theta[0] + 0.5, 101)
        for t0 in ts:
            assert profile_rss(sample, fit.theta_hat) <= profile_rss(
                sample, (t0, t0**2)
            ) + 1e-9


def test_singular_design_raises():
    x = np.full(13, 2.0)
    with pytest.raises(SingularDesignError):
        fit_unconstrained(manual_sample(np.arange(12.0), x), include_delta=False)


def test_newton_iteration_cap_raises_with_last_iterate(monkeypatch):
    monkeypatch.setattr(cls_mod, "NEWTON_MAX_ITER", 1)
    constraint = ConstraintSpec(
        g=lambda t: t[..., 1] - t[..., 0] ** 2,
        grad_g=lambda t: np.array([-2.0 * t[0], 1.0]),
    )
    sample = make_sample(seed=8)
    if fit_unconstrained(sample).theta_hat[1] >= fit_unconstrained(sample).theta_hat[0] ** 2:
        pytest.skip("constraint not binding for this draw")
    with pytest.raises(NewtonConvergenceError) as err:
        fit_constrained(sample, constraint)
    assert err.value.last_iterate.shape == (2,)


def test_affine_consistency_guard():
    with pytest.raises(ValueError):
        ConstraintSpec(
            g=lambda t: t[..., 1] + 1.0,  # disagrees with the coefficients
            grad_g=lambda t: np.array([0.0, 1.0]),
            affine=(np.array([0.0, 1.0]), 0.0),
        )
