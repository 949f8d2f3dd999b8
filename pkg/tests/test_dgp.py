import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from boundaryboot.dgp import (
    Arch1,
    CorrelatedWithRegressor,
    Fixed,
    IidNormal,
    LocalDrift,
    LocalToBoundary,
    NearUnitRoot,
    Stationary,
    UnitRoot,
    generate_errors,
    generate_sample,
)
from boundaryboot.rng import derive_stream


def test_iid_normal_is_identity_on_stream():
    eps = generate_errors(IidNormal(), 4, derive_stream(7))
    assert_array_equal(eps, derive_stream(7).standard_normal(4))


def test_arch_degenerates_without_feedback():
    eps = generate_errors(Arch1(omega=0.7, alpha=0.0), 6, derive_stream(3))
    twin = derive_stream(3)
    twin.standard_normal()  # the recursion's start-up draw
    assert_array_equal(eps, np.sqrt(0.7) * twin.standard_normal(6))


def test_arch_unconditional_variance():
    # E eps_t^2 = omega / (1 - alpha) = 1; tolerance is three simulation
    # standard errors (fourth-moment and autocorrelation factors included)
    eps = generate_errors(Arch1(0.7, 0.3), 1_000_000, derive_stream(11))
    assert abs(np.mean(eps**2) - 1.0) < 0.0068


def test_correlated_errors_mix_given_shocks():
    shocks = derive_stream(1).standard_normal(50)
    eps = generate_errors(
        CorrelatedWithRegressor(0.5), 50, derive_stream(2), regressor_shocks=shocks
    )
    eta = derive_stream(2).standard_normal(50)
    assert_allclose(eps, np.sqrt(0.5) * shocks + np.sqrt(0.5) * eta, rtol=0, atol=0)


def test_errors_reject_bad_inputs():
    with pytest.raises(ValueError):
        generate_errors(IidNormal(), 0, derive_stream(0))
    with pytest.raises(ValueError):
        generate_errors(CorrelatedWithRegressor(), 5, derive_stream(0), None)
    with pytest.raises(ValueError):
        Arch1(omega=-1.0)
    with pytest.raises(ValueError):
        Stationary(rho=1.0)
    with pytest.raises(ValueError):
        NearUnitRoot(c=0.0)


def test_zero_coefficients_reproduce_errors():
    sample = generate_sample(UnitRoot(), IidNormal(), Fixed((0.0, 0.0)), 30, derive_stream(5))
    twin = derive_stream(5)
    twin.standard_normal(30)  # regressor shocks drawn first
    assert_array_equal(sample.y, twin.standard_normal(30))


def test_unit_root_increments_have_unit_variance():
    # mean over replications of mean((sqrt(n) * dx)^2); LLN check
    n, reps = 400, 200
    vals = []
    for r in range(reps):
        s = generate_sample(UnitRoot(), IidNormal(), Fixed((0.0, 0.0)), n, derive_stream(13, r))
        vals.append(np.mean((np.sqrt(n) * s.dx) ** 2))
    assert abs(np.mean(vals) - 1.0) < 3.0 * np.sqrt(2.0 / (n * reps))


def test_local_drift_resolution():
    sample = generate_sample(
        UnitRoot(), IidNormal(), LocalDrift((5.0, 0.0)), 100, derive_stream(1)
    )
    assert_allclose(sample.resolved_theta, [0.5, 0.0], rtol=0, atol=0)


def test_local_to_boundary_resolution():
    truth = LocalToBoundary((1.0, 0.0), (2.0, 4.0))
    assert_allclose(truth.resolve(400), [1.1, 0.2])


def test_sample_determinism():
    kw = dict(regressor=NearUnitRoot(2.0), errors=Arch1(), truth=Fixed((0.2, 0.1)), n=60)
    a = generate_sample(rng=derive_stream(9, 1), **kw)
    b = generate_sample(rng=derive_stream(9, 1), **kw)
    assert_array_equal(a.y, b.y)
    assert_array_equal(a.x, b.x)


def test_near_unit_root_continuity_at_zero_rate():
    n = 200
    ur = generate_sample(UnitRoot(), IidNormal(), Fixed((0.0, 0.0)), n, derive_stream(21))
    nur = generate_sample(
        NearUnitRoot(1e-6), IidNormal(), Fixed((0.0, 0.0)), n, derive_stream(21)
    )
    assert np.max(np.abs(ur.x - nur.x)) < 1e-4


def test_slope_estimates_center_on_zero_without_predictability():
    # Fixed((theta1, 0)): the predictor carries no signal, so OLS slopes
    # average to zero across replications
    n, reps = 1600, 500
    slopes = np.empty(reps)
    for r in range(reps):
        s = generate_sample(UnitRoot(), IidNormal(), Fixed((0.3, 0.0)), n, derive_stream(33, r))
        z = np.column_stack([np.ones(n), s.x_lag])
        slopes[r] = np.linalg.lstsq(z, s.y, rcond=None)[0][1]
    se = slopes.std(ddof=1) / np.sqrt(reps)
    assert abs(slopes.mean()) < 3.0 * se


def test_stationary_regressor_is_unscaled_ar1():
    s = generate_sample(Stationary(0.5), IidNormal(), Fixed((0.0, 0.0)), 40, derive_stream(17))
    twin = derive_stream(17)
    x0 = twin.standard_normal() / np.sqrt(1.0 - 0.25)
    shocks = twin.standard_normal(40)
    path = [x0]
    for e in shocks:
        path.append(0.5 * path[-1] + e)
    assert_allclose(s.x, path, rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=10, max_value=40),
    seed=st.integers(min_value=0, max_value=2**31),
    regressor=st.sampled_from([UnitRoot(), NearUnitRoot(3.0), Stationary(0.5)]),
    errors=st.sampled_from([IidNormal(), Arch1(), CorrelatedWithRegressor()]),
)
def test_sample_shapes_and_determinism(n, seed, regressor, errors):
    a = generate_sample(regressor, errors, Fixed((0.1, 0.2)), n, derive_stream(seed))
    b = generate_sample(regressor, errors, Fixed((0.1, 0.2)), n, derive_stream(seed))
    assert a.y.shape == (n,)
    assert a.x.shape == (n + 1,)
    assert np.all(np.isfinite(a.y)) and np.all(np.isfinite(a.x))
    assert_array_equal(a.y, b.y)
    assert_array_equal(a.x, b.x)
