"""Simulators for the limit laws of the constrained estimator and its bootstrap.

The limit objects are built from a random moment matrix ``M`` (a functional
of the regressor's limit process), an independent Gaussian score ``xi``,
and an M-metric projection onto a half-plane whose right-hand side encodes
the scheme-dependent shift of the constraint set.  Draws double as
distributional oracles for the finite-sample machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .linalg import check_pd, project_halfplane_core, sym_inv_sqrt

CASE_INTERIOR = "interior"
CASE_BOUNDARY = "boundary"
CASE_STANDARD_AT_BOUNDARY = "standard-at-boundary"


@dataclass(frozen=True)
class BrownianMotion:
    """Brownian regressor limit (unit-root case)."""


@dataclass(frozen=True)
class OrnsteinUhlenbeck:
    """Ornstein-Uhlenbeck regressor limit (near-unit-root case), rate c > 0."""

    c: float

    def __post_init__(self) -> None:
        if not self.c > 0.0:
            raise ValueError("Ornstein-Uhlenbeck rate c must be positive")


@dataclass(frozen=True, eq=False)
class FixedM:
    """Degenerate limit with a fixed moment matrix (stationary-regressor case)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", check_pd(self.matrix, "fixed M"))


RegressorLimit = Union[BrownianMotion, OrnsteinUhlenbeck, FixedM]


@dataclass(frozen=True, eq=False)
class LimitConfig:
    """Ingredients of the limit laws.

    ``omega`` is the 2x2 long-run covariance of the (regressor, response)
    increments; ``sigma_e2`` is the response variance corrected for the
    regressor increments and is computed from ``omega`` when omitted.
    """

    omega: np.ndarray
    g_dot: np.ndarray
    g_star_dot: np.ndarray | None = None
    sigma_e2: float | None = None
    grid: int = 2000
    regressor_limit: RegressorLimit = field(default_factory=BrownianMotion)

    def __post_init__(self) -> None:
        omega = check_pd(self.omega, "omega")
        object.__setattr__(self, "omega", omega)
        g_dot = np.asarray(self.g_dot, dtype=float)
        if g_dot.shape != (2,) or not np.any(g_dot):
            raise ValueError("g_dot must be a nonzero 2-vector")
        object.__setattr__(self, "g_dot", g_dot)
        if self.g_star_dot is None:
            object.__setattr__(self, "g_star_dot", g_dot.copy())
        else:
            object.__setattr__(
                self, "g_star_dot", np.asarray(self.g_star_dot, dtype=float)
            )
        implied = float(omega[1, 1] - omega[0, 1] ** 2 / omega[0, 0])
        if self.sigma_e2 is None:
            object.__setattr__(self, "sigma_e2", implied)
        elif abs(self.sigma_e2 - implied) > 1e-12 * max(1.0, implied):
            raise ValueError(
                f"sigma_e2={self.sigma_e2} inconsistent with omega (implied {implied})"
            )
        if self.grid < 100:
            raise ValueError("need grid >= 100")

    @property
    def omega_xx(self) -> float:
        return float(self.omega[0, 0])

    @property
    def omega_xz(self) -> float:
        return float(self.omega[0, 1])

    @property
    def v_c(self) -> np.ndarray:
        """Shift picked up by the estimator under a mean-reverting regressor."""
        if isinstance(self.regressor_limit, OrnsteinUhlenbeck):
            return np.array(
                [0.0, self.regressor_limit.c * self.omega_xz / self.omega_xx]
            )
        return np.zeros(2)


@dataclass(frozen=True, eq=False)
class LimitDraw:
    """One draw of (M, xi, ell) plus an optional paired bootstrap draw."""

    m: np.ndarray
    xi: np.ndarray
    ell: np.ndarray
    ell_star: np.ndarray | None = None


def simulate_M(config: LimitConfig, rng: np.random.Generator) -> np.ndarray:
    """Riemann-sum approximation of the limiting moment matrix.

    The regressor path is simulated on a uniform grid (exact transition
    density for the Ornstein-Uhlenbeck case); the stationary case returns
    the stored matrix unchanged.
    """
    lim = config.regressor_limit
    if isinstance(lim, FixedM):
        return lim.matrix
    grid = config.grid
    dt = 1.0 / grid
    shocks = rng.standard_normal(grid)
    if isinstance(lim, BrownianMotion):
        increments = np.sqrt(config.omega_xx * dt) * shocks
        path = np.concatenate(([0.0], np.cumsum(increments)))[:-1]
    else:
        phi = np.exp(-lim.c * dt)
        sd = np.sqrt(config.omega_xx * (1.0 - phi * phi) / (2.0 * lim.c))
        path = np.empty(grid)
        prev = 0.0
        vals = sd * shocks
        for i in range(grid):
            prev = phi * prev + vals[i]
            path[i] = prev
        path = np.concatenate(([0.0], path))[:-1]
    m12 = float(path.mean())
    m22 = float(path @ path / grid)
    return np.array([[1.0, m12], [m12, m22]])


def project_halfplane(
    v: np.ndarray, m: np.ndarray, g_dot: np.ndarray, rhs: float
) -> np.ndarray:
    """arg min of ||lam - v||_M over the half-plane {g_dot' lam >= rhs}.

    Returns ``v`` unchanged whenever it is already feasible; otherwise the
    output lies on the boundary line ``g_dot' lam = rhs``.
    """
    m = check_pd(m, "M")
    g_dot = np.asarray(g_dot, dtype=float)
    if g_dot.shape != (2,) or not np.any(g_dot):
        raise ValueError("g_dot must be a nonzero 2-vector")
    return project_halfplane_core(v, m, g_dot, float(rhs))


def draw_original_limit(
    config: LimitConfig,
    boundary: bool,
    rng: np.random.Generator,
    drift: tuple[np.ndarray, float] | None = None,
) -> LimitDraw:
    """Draw the limit of the normalized constrained estimator.

    Interior case: ``M^{-1/2} xi`` (plus the mean-reversion shift when the
    regressor limit is Ornstein-Uhlenbeck).  Boundary case: M-metric
    projection onto ``{g_dot' lam >= 0}``.  Drift case ``(vartheta, c)``:
    ``vartheta`` plus the projection onto ``{g_dot' lam >= -c}``.
    """
    m = simulate_M(config, rng)
    xi = np.sqrt(config.sigma_e2) * rng.standard_normal(2)
    base = sym_inv_sqrt(m) @ xi + config.v_c
    if drift is not None:
        vartheta = np.asarray(drift[0], dtype=float)
        c = float(drift[1])
        ell = vartheta + project_halfplane(base, m, config.g_dot, -c)
    elif boundary:
        ell = project_halfplane(base, m, config.g_dot, 0.0)
    else:
        ell = base
    return LimitDraw(m=m, xi=xi, ell=ell)


def draw_bootstrap_limit(
    config: LimitConfig,
    m: np.ndarray,
    ell: np.ndarray,
    case: str,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw the paired bootstrap limit given the original draw's (M, ell).

    ``interior``: identity map on a fresh ``M^{-1/2} xi*``.  ``boundary``:
    projection with right-hand side ``(g*_dot - g_dot)' ell`` (zero when the
    corrected scheme's gradient matches, reproducing the original boundary
    law given M).  ``standard-at-boundary``: right-hand side ``-g_dot' ell``,
    the randomly shifted half-plane of the uncorrected scheme.
    """
    xi_star = np.sqrt(config.sigma_e2) * rng.standard_normal(2)
    base = sym_inv_sqrt(m) @ xi_star
    if case == CASE_INTERIOR:
        return base
    if case == CASE_BOUNDARY:
        rhs = float((config.g_star_dot - config.g_dot) @ np.asarray(ell, dtype=float))
    elif case == CASE_STANDARD_AT_BOUNDARY:
        rhs = -float(config.g_dot @ np.asarray(ell, dtype=float))
    else:
        raise ValueError(f"unknown bootstrap limit case: {case!r}")
    return project_halfplane(base, m, config.g_dot, rhs)
