"""Constrained least squares for the augmented predictive regression.

Estimation runs on ``y_t = theta_1 + theta_2 x_{n,t-1} + delta dx_{n,t} + e_t``
with the two-dimensional ``theta`` restricted to ``{g(theta) >= threshold}``
while ``delta`` stays free.  The active-set structure is a dichotomy: either
the unconstrained estimate is feasible and is returned as-is, or the solution
lies on ``g(theta) = threshold``.  Affine constraints are solved in closed
form (a projection in the metric of the delta-partialled moment matrix);
smooth nonlinear constraints go through a damped Newton iteration on the
equality-constrained KKT system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .dgp import TimeSeriesSample
from .linalg import COND_LIMIT, check_pd

GradFn = Callable[[np.ndarray], np.ndarray]
ScalarFn = Callable[[np.ndarray], float]

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 100


class EstimationError(RuntimeError):
    """Base class for estimation failures."""


class SingularDesignError(EstimationError):
    """Design matrix is rank deficient (condition number above the limit)."""


class NewtonConvergenceError(EstimationError):
    """Boundary Newton iteration failed; ``last_iterate`` holds the final point."""

    def __init__(self, message: str, last_iterate: np.ndarray):
        super().__init__(message)
        self.last_iterate = np.asarray(last_iterate, dtype=float)


# --------------------------------------------------------------------------
# constraint and hypothesis specifications
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConstraintSpec:
    """A smooth scalar constraint ``g`` with its gradient.

    When the constraint is affine, ``affine = (a, b)`` with
    ``g(theta) = a' theta - b`` unlocks the closed-form solvers; consistency
    of the callables with the coefficients is checked on random probes at
    construction.
    """

    g: ScalarFn
    grad_g: GradFn
    affine: tuple[np.ndarray, float] | None = None

    def __post_init__(self) -> None:
        if self.affine is not None:
            a = np.asarray(self.affine[0], dtype=float)
            b = float(self.affine[1])
            if a.shape != (2,) or not np.any(a):
                raise ValueError("affine coefficient vector must be a nonzero 2-vector")
            object.__setattr__(self, "affine", (a, b))
            probe_rng = np.random.Generator(np.random.Philox(20240919))
            for theta in probe_rng.standard_normal((8, 2)) * 3.0:
                if abs(float(self.g(theta)) - (a @ theta - b)) > 1e-12 * (
                    1.0 + abs(a @ theta - b)
                ):
                    raise ValueError("g disagrees with its affine coefficients")
                if np.max(np.abs(np.asarray(self.grad_g(theta), dtype=float) - a)) > 1e-12:
                    raise ValueError("grad_g disagrees with its affine coefficients")

    def __reduce__(self):
        # affine specs rebuild from their coefficients so that plans holding
        # them can cross process boundaries; nonaffine callables must be
        # module-level to be picklable
        if self.affine is not None:
            return (ConstraintSpec.from_affine, (self.affine[0], self.affine[1]))
        return super().__reduce__()

    @classmethod
    def from_affine(cls, a, b: float = 0.0) -> "ConstraintSpec":
        a = np.asarray(a, dtype=float)

        def g(theta, _a=a, _b=b):
            return np.asarray(theta) @ _a - _b

        def grad_g(theta, _a=a):
            return _a.copy()

        return cls(g=g, grad_g=grad_g, affine=(a, b))

    @classmethod
    def nonnegative_slope(cls) -> "ConstraintSpec":
        """The leading example g(theta) = theta_2 (sign-restricted predictability)."""
        return cls.from_affine((0.0, 1.0), 0.0)


@dataclass(frozen=True)
class BoundaryNull:
    """H0: the true value lies on the boundary, tested one-sided via g."""


@dataclass(frozen=True, eq=False)
class SimpleNull:
    """H0: theta_0 equals a given boundary point."""

    theta_bar: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta_bar", np.asarray(self.theta_bar, dtype=float))


@dataclass(frozen=True, eq=False)
class SmoothNull:
    """H0: h(theta_0) = 0 for a smooth h whose zero set crosses the boundary."""

    h: ScalarFn
    grad_h: GradFn


HypothesisSpec = Union[BoundaryNull, SimpleNull, SmoothNull]


def validate_hypothesis(hyp: HypothesisSpec, constraint: ConstraintSpec) -> None:
    """Check cross-invariants between a hypothesis and the constraint."""
    if isinstance(hyp, SimpleNull):
        if abs(float(constraint.g(hyp.theta_bar))) > 1e-10:
            raise ValueError("SimpleNull point must lie on the constraint boundary")


# --------------------------------------------------------------------------
# fit results
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FitResult:
    """Constrained/unconstrained estimates plus the usual diagnostics.

    ``m_n`` is the raw moment matrix ``n^{-1} sum x~_t x~_t'`` with
    ``x~_t = (1, x_{n,t-1})'`` regardless of whether the delta column was
    included; ``threshold`` is the right-hand side actually used
    (``-inf`` for a purely unconstrained fit).
    """

    theta_hat: np.ndarray
    theta_tilde: np.ndarray
    delta_hat: float | None
    residuals: np.ndarray
    m_n: np.ndarray
    sigma_e2_hat: float
    constraint_active: bool
    multiplier: float
    threshold: float
    g_hat: float | None = None

    @property
    def n(self) -> int:
        return self.residuals.shape[0]


def _design(sample: TimeSeriesSample, include_delta: bool) -> np.ndarray:
    cols = [np.ones(sample.n), sample.x_lag]
    if include_delta:
        cols.append(sample.dx)
    return np.column_stack(cols)


def _check_design(design: np.ndarray) -> None:
    if np.linalg.cond(design) >= COND_LIMIT:
        raise SingularDesignError(
            f"design matrix condition number {np.linalg.cond(design):.3e} "
            f"exceeds {COND_LIMIT:.0e}"
        )


@dataclass(frozen=True, eq=False)
class _Workspace:
    """Precomputed pieces shared by the constrained and unconstrained solves."""

    z: np.ndarray  # n x 2 block (1, x_lag)
    d: np.ndarray | None  # delta column, or None
    gram_part: np.ndarray  # Z'Z with the delta column partialled out
    theta_tilde: np.ndarray
    delta_tilde: float | None
    m_n: np.ndarray


def _prepare(sample: TimeSeriesSample, include_delta: bool) -> _Workspace:
    design = _design(sample, include_delta)
    _check_design(design)
    z = design[:, :2]
    ztz = z.T @ z
    coef, *_ = np.linalg.lstsq(design, sample.y, rcond=None)
    if include_delta:
        d = design[:, 2]
        dtd = d @ d
        if dtd <= 0.0:
            raise SingularDesignError("delta column is identically zero")
        ztd = z.T @ d
        gram_part = ztz - np.outer(ztd, ztd) / dtd
        delta_tilde = float(coef[2])
    else:
        d = None
        gram_part = ztz
        delta_tilde = None
    m_n = check_pd(ztz / sample.n, "moment matrix M_n")
    check_pd(gram_part / sample.n, "partialled moment matrix")
    return _Workspace(
        z=z,
        d=d,
        gram_part=gram_part,
        theta_tilde=coef[:2].copy(),
        delta_tilde=delta_tilde,
        m_n=m_n,
    )


def _finish(
    sample: TimeSeriesSample,
    ws: _Workspace,
    theta: np.ndarray,
    *,
    constraint_active: bool,
    multiplier: float,
    threshold: float,
    g_hat: float | None,
) -> FitResult:
    resid = sample.y - ws.z @ theta
    if ws.d is not None:
        delta = float((ws.d @ resid) / (ws.d @ ws.d))
        resid = resid - delta * ws.d
    else:
        delta = None
    return FitResult(
        theta_hat=theta,
        theta_tilde=ws.theta_tilde,
        delta_hat=delta,
        residuals=resid,
        m_n=ws.m_n,
        sigma_e2_hat=float(resid @ resid / sample.n),
        constraint_active=constraint_active,
        multiplier=multiplier,
        threshold=threshold,
        g_hat=g_hat,
    )


def fit_unconstrained(
    sample: TimeSeriesSample, include_delta: bool = True
) -> FitResult:
    """OLS of y on (1, x_{n,t-1}[, dx_{n,t}])."""
    ws = _prepare(sample, include_delta)
    return _finish(
        sample,
        ws,
        ws.theta_tilde,
        constraint_active=False,
        multiplier=0.0,
        threshold=float("-inf"),
        g_hat=None,
    )


def fit_constrained(
    sample: TimeSeriesSample,
    constraint: ConstraintSpec,
    threshold: float = 0.0,
    include_delta: bool = True,
) -> FitResult:
    """Least squares subject to ``g(theta) >= threshold`` (delta left free)."""
    ws = _prepare(sample, include_delta)
    g_tilde = float(constraint.g(ws.theta_tilde))
    if g_tilde >= threshold:
        return _finish(
            sample,
            ws,
            ws.theta_tilde,
            constraint_active=False,
            multiplier=0.0,
            threshold=float(threshold),
            g_hat=g_tilde,
        )
    theta = minimize_quadratic_on_constraint(
        ws.gram_part, ws.theta_tilde, constraint, float(threshold)
    )
    grad_q = 2.0 * (ws.gram_part @ (theta - ws.theta_tilde)) / sample.n
    grad_g = np.asarray(constraint.grad_g(theta), dtype=float)
    multiplier = max(0.0, float(grad_q @ grad_g) / float(grad_g @ grad_g))
    return _finish(
        sample,
        ws,
        theta,
        constraint_active=True,
        multiplier=multiplier,
        threshold=float(threshold),
        g_hat=float(constraint.g(theta)),
    )


# --------------------------------------------------------------------------
# boundary solves
# --------------------------------------------------------------------------


def minimize_quadratic_on_constraint(
    gram: np.ndarray,
    center: np.ndarray,
    constraint: ConstraintSpec,
    threshold: float,
) -> np.ndarray:
    """Minimize ``(theta-center)' gram (theta-center)`` over ``g(theta) >= threshold``.

    The caller is expected to have checked that ``center`` itself is
    infeasible, so the minimizer lies on ``g(theta) = threshold``.
    """
    if constraint.affine is not None:
        a, b = constraint.affine
        gram_inv_a = np.linalg.solve(gram, a)
        shift = (threshold + b - a @ center) / (a @ gram_inv_a)
        return center + shift * gram_inv_a
    return _newton_boundary(gram, center, constraint, threshold)


def _fd_hessian(grad_g: GradFn, theta: np.ndarray) -> np.ndarray:
    h = 1e-6 * (1.0 + np.abs(theta))
    cols = []
    for j in range(2):
        step = np.zeros(2)
        step[j] = h[j]
        gp = np.asarray(grad_g(theta + step), dtype=float)
        gm = np.asarray(grad_g(theta - step), dtype=float)
        cols.append((gp - gm) / (2.0 * h[j]))
    hess = np.column_stack(cols)
    return 0.5 * (hess + hess.T)


def _newton_boundary(
    gram: np.ndarray,
    center: np.ndarray,
    constraint: ConstraintSpec,
    threshold: float,
) -> np.ndarray:
    """Damped Newton on the equality-constrained KKT system.

    Runs from the unconstrained minimizer and from its projection onto the
    tangent line of the constraint; among converged runs the one with the
    smallest objective wins (all boundary stationary points are
    asymptotically equivalent, so any consistent tie-break is admissible).
    """
    scale = float(np.trace(gram)) / 2.0

    def objective(theta: np.ndarray) -> float:
        diff = theta - center
        return float(diff @ gram @ diff)

    def kkt_residual(theta: np.ndarray, mu: float) -> np.ndarray:
        grad_q = 2.0 * (gram @ (theta - center)) / scale
        grad_g = np.asarray(constraint.grad_g(theta), dtype=float)
        return np.array(
            [
                grad_q[0] - mu * grad_g[0],
                grad_q[1] - mu * grad_g[1],
                float(constraint.g(theta)) - threshold,
            ]
        )

    def tangent_start() -> np.ndarray:
        grad_g = np.asarray(constraint.grad_g(center), dtype=float)
        if not np.any(grad_g):
            return center.copy()
        gap = threshold - float(constraint.g(center))
        gram_inv_g = np.linalg.solve(gram, grad_g)
        return center + gap / (grad_g @ gram_inv_g) * gram_inv_g

    best: np.ndarray | None = None
    best_obj = np.inf
    last = center.copy()
    for start in (center.copy(), tangent_start()):
        theta = start.copy()
        grad_g = np.asarray(constraint.grad_g(theta), dtype=float)
        if not np.any(grad_g):
            continue
        grad_q = 2.0 * (gram @ (theta - center)) / scale
        mu = float(grad_q @ grad_g) / float(grad_g @ grad_g)
        converged = False
        for _ in range(NEWTON_MAX_ITER):
            res = kkt_residual(theta, mu)
            if np.max(np.abs(res)) <= NEWTON_TOL:
                converged = True
                break
            grad_g = np.asarray(constraint.grad_g(theta), dtype=float)
            if not np.any(grad_g):
                break
            hess_g = _fd_hessian(constraint.grad_g, theta)
            jac = np.zeros((3, 3))
            jac[:2, :2] = 2.0 * gram / scale - mu * hess_g
            jac[:2, 2] = -grad_g
            jac[2, :2] = grad_g
            try:
                step = np.linalg.solve(jac, -res)
            except np.linalg.LinAlgError:
                break
            norm0 = np.max(np.abs(res))
            damp = 1.0
            for _ in range(30):
                cand_theta = theta + damp * step[:2]
                cand_mu = mu + damp * step[2]
                if np.max(np.abs(kkt_residual(cand_theta, cand_mu))) < norm0:
                    break
                damp *= 0.5
            theta = theta + damp * step[:2]
            mu = mu + damp * step[2]
        last = theta
        if converged and objective(theta) < best_obj:
            best = theta
            best_obj = objective(theta)
    if best is None:
        raise NewtonConvergenceError(
            f"boundary Newton did not reach tolerance {NEWTON_TOL:g} "
            f"within {NEWTON_MAX_ITER} iterations",
            last,
        )
    return best


# --------------------------------------------------------------------------
# test statistics
# --------------------------------------------------------------------------


def statistic_value(
    fit: FitResult,
    hyp: HypothesisSpec,
    n: int,
    reference=None,
) -> float:
    """Evaluate the test statistic for a fit under the given hypothesis.

    ``reference`` defaults to the null value (0, or ``theta_bar`` for a
    simple null); bootstrap statistics pass the original fit's ``h``/``g``
    value (or estimate) so that deviations are centered at the original
    estimate.
    """
    if isinstance(hyp, SmoothNull):
        ref = 0.0 if reference is None else float(reference)
        dev = np.sqrt(n) * (float(hyp.h(fit.theta_hat)) - ref)
        return float(dev * dev)
    if isinstance(hyp, BoundaryNull):
        if fit.g_hat is None:
            raise ValueError("one-sided statistic needs a fit produced with a constraint")
        ref = 0.0 if reference is None else float(reference)
        return float(np.sqrt(n) * (fit.g_hat - ref))
    if isinstance(hyp, SimpleNull):
        ref = hyp.theta_bar if reference is None else np.asarray(reference, dtype=float)
        diff = fit.theta_hat - ref
        return float(n * (diff @ diff))
    raise TypeError(f"unknown hypothesis: {hyp!r}")
