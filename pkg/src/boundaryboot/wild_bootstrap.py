"""Fixed-regressor wild bootstrap under shifted parameter-space schemes.

Bootstrap samples keep the regressor fixed and perturb the constrained-fit
residuals with i.i.d. mean-zero unit-variance weights.  Re-estimation runs
over a bootstrap parameter space ``{theta : g(theta) >= g*(theta_hat)}``
whose boundary shift ``g*`` distinguishes the schemes:

* ``standard``      g* = 0 (the original parameter space);
* ``restricted``    g* = g (the estimate sits on the bootstrap boundary);
* ``power``         g* = g - |g|^(1+kappa);
* ``rate``          g* = g - n^(-kappa) |g|;
* ``transform-fs``  no refit: a plug-in directional transform is applied to
  the unconstrained bootstrap deviations (identical to ``power`` for affine
  constraints, draw by draw);
* ``numerical-hl``  re-estimation at the slower rate s_n = n^(1/2-gamma)
  over the original parameter space.

For affine constraints every scheme reduces to closed-form half-plane
projections of the unconstrained deviations, which the engine vectorizes
across the bootstrap repetitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .constrained_ls import (
    BoundaryNull,
    ConstraintSpec,
    FitResult,
    HypothesisSpec,
    SimpleNull,
    SmoothNull,
    fit_constrained,
    fit_unconstrained,
    minimize_quadratic_on_constraint,
    statistic_value,
)
from .dgp import Stationary, TimeSeriesSample

GAUSSIAN = "gaussian"
RADEMACHER = "rademacher"

_FAMILIES = ("standard", "restricted", "power", "rate", "transform-fs", "numerical-hl")
_FIT_FAMILIES = ("standard", "restricted", "power", "rate")


@dataclass(frozen=True)
class SchemeSpec:
    """Which bootstrap parameter-space family to use, plus its tuning constants."""

    family: str
    kappa: float | None = None
    gamma: float | None = None
    weight_kind: str = GAUSSIAN

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown scheme family {self.family!r}")
        if self.weight_kind not in (GAUSSIAN, RADEMACHER):
            raise ValueError(f"unknown weight kind {self.weight_kind!r}")
        if self.family in ("power", "transform-fs"):
            if self.kappa is None or not self.kappa > 0.0:
                raise ValueError(f"{self.family} needs kappa > 0")
        elif self.family == "rate":
            if self.kappa is None or not 0.0 < self.kappa < 0.5:
                raise ValueError("rate needs kappa in (0, 1/2)")
        elif self.kappa is not None:
            raise ValueError(f"{self.family} takes no kappa")
        if self.family == "numerical-hl":
            if self.gamma is None or not 0.0 < self.gamma < 0.5:
                raise ValueError("numerical-hl needs gamma in (0, 1/2)")
        elif self.gamma is not None:
            raise ValueError(f"{self.family} takes no gamma")

    @classmethod
    def standard(cls, weight_kind: str = GAUSSIAN) -> "SchemeSpec":
        return cls("standard", weight_kind=weight_kind)

    @classmethod
    def restricted(cls, weight_kind: str = GAUSSIAN) -> "SchemeSpec":
        return cls("restricted", weight_kind=weight_kind)

    @classmethod
    def power_corrected(cls, kappa: float, weight_kind: str = GAUSSIAN) -> "SchemeSpec":
        return cls("power", kappa=kappa, weight_kind=weight_kind)

    @classmethod
    def rate_corrected(cls, kappa: float, weight_kind: str = GAUSSIAN) -> "SchemeSpec":
        return cls("rate", kappa=kappa, weight_kind=weight_kind)

    @classmethod
    def transform_fs(cls, kappa: float, weight_kind: str = GAUSSIAN) -> "SchemeSpec":
        return cls("transform-fs", kappa=kappa, weight_kind=weight_kind)

    @classmethod
    def numerical_hl(
        cls, gamma: float = 1.0 / 6.0, weight_kind: str = GAUSSIAN
    ) -> "SchemeSpec":
        return cls("numerical-hl", gamma=gamma, weight_kind=weight_kind)

    @property
    def tuning(self) -> float | None:
        """The scheme's tuning constant (kappa, or gamma for numerical-hl)."""
        return self.gamma if self.family == "numerical-hl" else self.kappa

    def deviation_scale(self, n: int) -> float:
        """Rate at which the scheme's bootstrap deviations are normalized."""
        if self.family == "numerical-hl":
            return float(n) ** (0.5 - self.gamma)
        return float(np.sqrt(n))


@dataclass(frozen=True, eq=False)
class BootstrapRun:
    """One complete bootstrap: statistics, counts-corrected p-values, echo."""

    tau_star: np.ndarray
    tau_n: float
    p_upper: float
    p_lower: float
    scheme: SchemeSpec
    B: int
    one_sided: bool

    def rejects(self, level: float) -> bool:
        """Apply the rejection convention at a nominal level.

        Two-sided statistics reject for small ``p_upper``; the one-sided
        boundary test rejects for small ``1 - p_lower``.  Both use the
        add-one finite-B correction, which is exactly sized under
        exchangeability.
        """
        if self.one_sided:
            return (1.0 - self.p_lower) <= level
        return self.p_upper <= level


def uses_delta_augmentation(sample: TimeSeriesSample) -> bool:
    """Whether the original fit includes the regressor-difference column.

    The column proxies the regressor innovations and is dropped for a
    stationary regressor, where its inclusion would break consistency.
    """
    return not isinstance(sample.regressor, Stationary)


def bootstrap_threshold(
    scheme: SchemeSpec, fit: FitResult, constraint: ConstraintSpec, n: int
) -> float:
    """The shifted right-hand side g*(theta_hat) of the bootstrap parameter space.

    The transform scheme does not refit over a shifted space but its
    implicit shift coincides with the power-corrected one; the numerical
    scheme re-estimates over the original space, so its threshold is 0.
    """
    g_hat = float(constraint.g(fit.theta_hat)) if fit.g_hat is None else fit.g_hat
    if scheme.family == "standard":
        return 0.0
    if scheme.family == "restricted":
        return g_hat
    if scheme.family in ("power", "transform-fs"):
        return g_hat - abs(g_hat) ** (1.0 + scheme.kappa)
    if scheme.family == "rate":
        return g_hat - float(n) ** (-scheme.kappa) * abs(g_hat)
    return 0.0  # numerical-hl


def draw_weights(
    weight_kind: str, B: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw a B x n multiplier matrix of the requested kind."""
    if weight_kind == GAUSSIAN:
        return rng.standard_normal((B, n))
    if weight_kind == RADEMACHER:
        return rng.integers(0, 2, size=(B, n)) * 2.0 - 1.0
    raise ValueError(f"unknown weight kind {weight_kind!r}")


def generate_bootstrap_sample(
    sample: TimeSeriesSample,
    fit: FitResult,
    weight_kind: str,
    rng: np.random.Generator,
    weights: np.ndarray | None = None,
) -> TimeSeriesSample:
    """Fixed-regressor wild bootstrap sample: y*_t = fitted_t + resid_t * w*_t.

    The regression function uses the constrained coefficient estimates only
    (no regressor-difference term), with the augmented-fit residuals as the
    wild-multiplied innovations.
    """
    w = draw_weights(weight_kind, 1, sample.n, rng)[0] if weights is None else weights
    y_star = fit.theta_hat[0] + fit.theta_hat[1] * sample.x_lag + fit.residuals * w
    return sample.with_y(y_star)


def _assemble_fit(
    bsample: TimeSeriesSample,
    theta_star: np.ndarray,
    theta_tilde: np.ndarray,
    m_n: np.ndarray,
    active: bool,
    multiplier: float,
    threshold: float,
    g_hat: float,
) -> FitResult:
    z = np.column_stack([np.ones(bsample.n), bsample.x_lag])
    resid = bsample.y - z @ theta_star
    return FitResult(
        theta_hat=theta_star,
        theta_tilde=theta_tilde,
        delta_hat=None,
        residuals=resid,
        m_n=m_n,
        sigma_e2_hat=float(resid @ resid / bsample.n),
        constraint_active=active,
        multiplier=multiplier,
        threshold=threshold,
        g_hat=g_hat,
    )


def bootstrap_estimate(
    bsample: TimeSeriesSample,
    scheme: SchemeSpec,
    constraint: ConstraintSpec,
    original_fit: FitResult,
    n: int,
) -> FitResult:
    """Re-estimate on one bootstrap sample under the given scheme."""
    if scheme.family in _FIT_FAMILIES:
        threshold = bootstrap_threshold(scheme, original_fit, constraint, n)
        return fit_constrained(bsample, constraint, threshold, include_delta=False)

    unc = fit_unconstrained(bsample, include_delta=False)
    theta_hat = original_fit.theta_hat
    m_n = original_fit.m_n
    g_hat = original_fit.g_hat
    if g_hat is None:
        g_hat = float(constraint.g(theta_hat))
    root_n = np.sqrt(n)
    u = root_n * (unc.theta_tilde - theta_hat)

    if scheme.family == "transform-fs":
        # plug-in directional transform of the unconstrained deviations
        grad = np.asarray(constraint.grad_g(theta_hat), dtype=float)
        rhs = -root_n * abs(g_hat) ** (1.0 + scheme.kappa)
        from .linalg import project_halfplane_core

        lam = project_halfplane_core(u, m_n, grad, rhs)
        theta_star = theta_hat + lam / root_n
        return _assemble_fit(
            bsample,
            theta_star,
            unc.theta_tilde,
            m_n,
            active=bool(grad @ u < rhs),
            multiplier=0.0,
            threshold=bootstrap_threshold(scheme, original_fit, constraint, n),
            g_hat=float(constraint.g(theta_star)),
        )

    # numerical-hl: minimize || s_n (theta - theta_hat) - u ||_{M_n} over g >= 0
    s_n = scheme.deviation_scale(n)
    center = theta_hat + u / s_n
    g_center = float(constraint.g(center))
    if g_center >= 0.0:
        theta_star = center
        active = False
        multiplier = 0.0
    else:
        theta_star = minimize_quadratic_on_constraint(m_n, center, constraint, 0.0)
        grad_q = 2.0 * (m_n @ (theta_star - center))
        grad_g = np.asarray(constraint.grad_g(theta_star), dtype=float)
        multiplier = max(0.0, float(grad_q @ grad_g) / float(grad_g @ grad_g))
        active = True
    return _assemble_fit(
        bsample,
        theta_star,
        unc.theta_tilde,
        m_n,
        active=active,
        multiplier=multiplier,
        threshold=0.0,
        g_hat=float(constraint.g(theta_star)),
    )


# --------------------------------------------------------------------------
# the bootstrap engine
# --------------------------------------------------------------------------


class _Engine:
    """Shared state for repeated bootstrap passes over one sample."""

    def __init__(
        self,
        sample: TimeSeriesSample,
        constraint: ConstraintSpec,
        hyp: HypothesisSpec,
    ):
        self.sample = sample
        self.constraint = constraint
        self.hyp = hyp
        self.n = sample.n
        self.ofit = fit_constrained(
            sample, constraint, 0.0, include_delta=uses_delta_augmentation(sample)
        )
        self.z = np.column_stack([np.ones(sample.n), sample.x_lag])
        self.gram = self.z.T @ self.z
        self.gram_inv = np.linalg.inv(self.gram)
        self.g_hat = self.ofit.g_hat
        self.theta_hat = self.ofit.theta_hat
        self.tau_n = statistic_value(self.ofit, hyp, self.n)
        if isinstance(hyp, SmoothNull):
            self.center_value = float(hyp.h(self.theta_hat))
        elif isinstance(hyp, BoundaryNull):
            self.center_value = self.g_hat
        else:
            self.center_value = None

    # -- unconstrained deviations, vectorized over draws ------------------

    def deviations(self, weights: np.ndarray) -> np.ndarray:
        """sqrt(n) * (bootstrap OLS - theta_hat) for every weight row."""
        perturbed = weights * self.ofit.residuals
        return np.sqrt(self.n) * (perturbed @ self.z) @ self.gram_inv

    # -- scheme application ------------------------------------------------

    def theta_stars_affine(
        self, u: np.ndarray, rhs: float, scale: float
    ) -> np.ndarray:
        from .linalg import project_halfplane_core

        a, _ = self.constraint.affine
        lam = project_halfplane_core(u, self.ofit.m_n, a, rhs)
        return self.theta_hat + lam / scale

    def theta_stars(self, scheme: SchemeSpec, weights: np.ndarray) -> np.ndarray:
        """Bootstrap estimates (B x 2) for one scheme and a weight matrix."""
        if self.constraint.affine is not None:
            u = self.deviations(weights)
            scale = scheme.deviation_scale(self.n)
            if scheme.family == "numerical-hl":
                rhs = -scale * self.g_hat
            else:
                threshold = bootstrap_threshold(
                    scheme, self.ofit, self.constraint, self.n
                )
                rhs = np.sqrt(self.n) * (threshold - self.g_hat)
                # deviations of fit-based/transform schemes are both at the
                # sqrt(n) rate; their right-hand sides coincide for affine g
            return self.theta_stars_affine(u, rhs, scale)
        out = np.empty((weights.shape[0], 2))
        for b in range(weights.shape[0]):
            bsample = generate_bootstrap_sample(
                self.sample, self.ofit, scheme.weight_kind, rng=None, weights=weights[b]
            )
            bfit = bootstrap_estimate(
                bsample, scheme, self.constraint, self.ofit, self.n
            )
            out[b] = bfit.theta_hat
        return out

    def theta_stars_at_threshold(
        self, threshold: float, weights: np.ndarray
    ) -> np.ndarray:
        """Constrained bootstrap re-fits at an explicit right-hand side."""
        if self.constraint.affine is not None:
            u = self.deviations(weights)
            rhs = np.sqrt(self.n) * (threshold - self.g_hat)
            return self.theta_stars_affine(u, rhs, np.sqrt(self.n))
        out = np.empty((weights.shape[0], 2))
        for b in range(weights.shape[0]):
            bsample = generate_bootstrap_sample(
                self.sample, self.ofit, GAUSSIAN, rng=None, weights=weights[b]
            )
            bfit = fit_constrained(
                bsample, self.constraint, threshold, include_delta=False
            )
            out[b] = bfit.theta_hat
        return out

    # -- statistics ----------------------------------------------------------

    def _evaluate(self, fn, thetas: np.ndarray) -> np.ndarray:
        try:
            vals = np.asarray(fn(thetas), dtype=float)
            if vals.shape == (thetas.shape[0],):
                return vals
        except Exception:
            pass
        return np.array([float(fn(row)) for row in thetas])

    def taus(self, thetas: np.ndarray, scale: float) -> np.ndarray:
        """Centered bootstrap statistics for a block of bootstrap estimates."""
        if isinstance(self.hyp, SmoothNull):
            dev = scale * (self._evaluate(self.hyp.h, thetas) - self.center_value)
            return dev * dev
        if isinstance(self.hyp, BoundaryNull):
            return scale * (self._evaluate(self.constraint.g, thetas) - self.center_value)
        diff = thetas - self.theta_hat
        return scale * scale * np.einsum("ij,ij->i", diff, diff)


def _pvalues(tau_star: np.ndarray, tau_n: float) -> tuple[float, float]:
    B = tau_star.shape[0]
    p_upper = (1.0 + int(np.sum(tau_star >= tau_n))) / (B + 1.0)
    p_lower = (1.0 + int(np.sum(tau_star <= tau_n))) / (B + 1.0)
    return p_upper, p_lower


def run_bootstrap(
    sample: TimeSeriesSample,
    constraint: ConstraintSpec,
    hyp: HypothesisSpec,
    scheme: SchemeSpec,
    B: int,
    rng: np.random.Generator | None = None,
    *,
    weights: np.ndarray | None = None,
) -> BootstrapRun:
    """Full wild-bootstrap pass: original fit, B re-fits, corrected p-values.

    ``weights`` may supply the B x n multiplier matrix explicitly (e.g. the
    exhaustive Rademacher set, or a matrix shared across schemes); otherwise
    it is drawn from ``rng`` according to the scheme's weight kind.
    """
    if B < 1:
        raise ValueError("need B >= 1")
    engine = _Engine(sample, constraint, hyp)
    if weights is None:
        if rng is None:
            raise ValueError("either weights or rng must be supplied")
        weights = draw_weights(scheme.weight_kind, B, sample.n, rng)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (B, sample.n):
            raise ValueError(f"weights must have shape ({B}, {sample.n})")
    thetas = engine.theta_stars(scheme, weights)
    tau_star = engine.taus(thetas, scheme.deviation_scale(sample.n))
    p_upper, p_lower = _pvalues(tau_star, engine.tau_n)
    return BootstrapRun(
        tau_star=tau_star,
        tau_n=engine.tau_n,
        p_upper=p_upper,
        p_lower=p_lower,
        scheme=scheme,
        B=B,
        one_sided=isinstance(hyp, BoundaryNull),
    )


def conservative_sup_p(
    sample: TimeSeriesSample,
    constraint: ConstraintSpec,
    hyp: HypothesisSpec,
    kappa: float,
    mu: float,
    grid_points: int = 21,
    B: int = 199,
    rng: np.random.Generator | None = None,
    *,
    weights: np.ndarray | None = None,
) -> float:
    """Supremum of bootstrap p-values over a grid of parameter-space shifts.

    The shifts run over an equally spaced grid on
    ``[-|g(theta_tilde)|^(1-mu), g(theta_hat)]`` (a single grid point means
    the upper endpoint), with each shift ``s`` inducing the re-fit space
    ``{theta : g(theta) >= s - g(theta_hat)^(1+kappa)}``.  Weight draws are
    shared across grid points so the supremum is a monotone functional of a
    single randomness source.  The returned value is conservative: rejecting
    when it is below the nominal level keeps the asymptotic size below that
    level even along sequences drifting to the boundary.
    """
    if not kappa > 0.0:
        raise ValueError("need kappa > 0")
    if not 0.0 < mu < 1.0:
        raise ValueError("need mu in (0, 1)")
    if grid_points < 1:
        raise ValueError("need grid_points >= 1")
    engine = _Engine(sample, constraint, hyp)
    if weights is None:
        if rng is None:
            raise ValueError("either weights or rng must be supplied")
        weights = draw_weights(GAUSSIAN, B, sample.n, rng)
    else:
        weights = np.asarray(weights, dtype=float)
    g_tilde = float(constraint.g(engine.ofit.theta_tilde))
    hi = engine.g_hat
    lo = -abs(g_tilde) ** (1.0 - mu)
    grid: Iterable[float]
    if grid_points == 1:
        grid = [hi]
    else:
        grid = np.linspace(lo, hi, grid_points)
    one_sided = isinstance(hyp, BoundaryNull)
    scale = float(np.sqrt(sample.n))
    sup_p = 0.0
    for s in grid:
        threshold = s - hi ** (1.0 + kappa)
        thetas = engine.theta_stars_at_threshold(threshold, weights)
        tau_star = engine.taus(thetas, scale)
        p_upper, p_lower = _pvalues(tau_star, engine.tau_n)
        p = (1.0 - p_lower) if one_sided else p_upper
        sup_p = max(sup_p, p)
    return sup_p
