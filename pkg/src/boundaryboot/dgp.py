"""Data generating processes for the predictive regression experiments.

A sample consists of a regressor path ``x_{n,0}, ..., x_{n,n}`` and the
response ``y_t = theta_1 + theta_2 x_{n,t-1} + eps_t`` for ``t = 1..n``.
Three regressor laws (unit root, near-unit root, stationary AR(1)) and
three error processes (i.i.d. Gaussian, ARCH(1), errors correlated with
the regressor shocks) are supported, with the true coefficient vector
either fixed or drifting at the ``n^{-1/2}`` rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.signal import lfilter


# --------------------------------------------------------------------------
# regressor laws
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitRoot:
    """Random-walk regressor x_t = sum_{i<=t} e_{x,i}, emitted as n^{-1/2} x_t."""

    label = "unit-root"


@dataclass(frozen=True)
class NearUnitRoot:
    """AR(1) with coefficient exp(-c/n), emitted as n^{-1/2} x_t.

    The exact exponential discretization matches the Ornstein-Uhlenbeck
    limit in distribution at the grid points; ``c > 0`` is the
    mean-reversion rate.
    """

    c: float

    def __post_init__(self) -> None:
        if not self.c > 0.0:
            raise ValueError("near-unit-root rate c must be positive")

    @property
    def label(self) -> str:
        return f"near-unit-root:{self.c:g}"


@dataclass(frozen=True)
class Stationary:
    """Stationary AR(1) regressor with |rho| < 1, emitted unscaled.

    Initialized from the stationary law N(0, 1/(1-rho^2)) so no burn-in
    is needed.
    """

    rho: float = 0.5

    def __post_init__(self) -> None:
        if not abs(self.rho) < 1.0:
            raise ValueError("stationary AR coefficient must satisfy |rho| < 1")

    @property
    def label(self) -> str:
        return f"stationary:{self.rho:g}"


RegressorKind = Union[UnitRoot, NearUnitRoot, Stationary]


# --------------------------------------------------------------------------
# error processes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IidNormal:
    """i.i.d. standard normal errors."""

    label = "iid-normal"


@dataclass(frozen=True)
class Arch1:
    """ARCH(1) errors: eps_t = sigma_t nu_t with sigma_t^2 = omega + alpha eps_{t-1}^2.

    The recursion starts from the stationary unconditional law
    ``eps_0 ~ N(0, omega/(1-alpha))`` to avoid burn-in transients.
    """

    omega: float = 0.7
    alpha: float = 0.3

    def __post_init__(self) -> None:
        if not self.omega > 0.0:
            raise ValueError("ARCH omega must be positive")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("ARCH alpha must lie in [0, 1)")

    @property
    def label(self) -> str:
        return "arch"


@dataclass(frozen=True)
class CorrelatedWithRegressor:
    """Errors sharing variance with the regressor shocks.

    ``eps_t = sqrt(weight) e_{x,t} + sqrt(1-weight) eta_t`` with
    ``eta_t ~ iid N(0,1)``; ``weight`` is the variance share loaded on the
    regressor shock.
    """

    weight: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("correlation weight must lie in [0, 1]")

    @property
    def label(self) -> str:
        return "correlated"


ErrorKind = Union[IidNormal, Arch1, CorrelatedWithRegressor]


# --------------------------------------------------------------------------
# true coefficient values
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    """Fixed true coefficients theta0."""

    theta0: tuple[float, float]

    def resolve(self, n: int) -> np.ndarray:
        return np.asarray(self.theta0, dtype=float)

    @property
    def anchor(self) -> tuple[float, float]:
        return (float(self.theta0[0]), float(self.theta0[1]))


@dataclass(frozen=True)
class LocalDrift:
    """Local alternative theta0 = a0 * n^{-1/2}."""

    a0: tuple[float, float]

    def resolve(self, n: int) -> np.ndarray:
        return np.asarray(self.a0, dtype=float) / np.sqrt(n)

    @property
    def anchor(self) -> tuple[float, float]:
        return (float(self.a0[0]), float(self.a0[1]))


@dataclass(frozen=True)
class LocalToBoundary:
    """Sequence theta_n = theta0 + n^{-1/2} vartheta drifting off a boundary point."""

    theta0: tuple[float, float]
    vartheta: tuple[float, float]

    def resolve(self, n: int) -> np.ndarray:
        return np.asarray(self.theta0, dtype=float) + np.asarray(
            self.vartheta, dtype=float
        ) / np.sqrt(n)

    @property
    def anchor(self) -> tuple[float, float]:
        return (float(self.theta0[0]), float(self.theta0[1]))


TrueValue = Union[Fixed, LocalDrift, LocalToBoundary]


# --------------------------------------------------------------------------
# samples
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeSeriesSample:
    """One simulated path together with the configuration that produced it.

    ``x`` has length ``n + 1`` and holds ``x_{n,0}, ..., x_{n,n}`` (already
    scaled by ``n^{-1/2}`` for the unit-root and near-unit-root laws); ``y``
    has length ``n``.
    """

    y: np.ndarray
    x: np.ndarray
    n: int
    resolved_theta: np.ndarray
    regressor: RegressorKind = field(default_factory=UnitRoot)
    errors: ErrorKind = field(default_factory=IidNormal)
    truth: TrueValue = Fixed((0.0, 0.0))

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(
            self, "resolved_theta", np.asarray(self.resolved_theta, dtype=float)
        )
        if y.shape != (self.n,):
            raise ValueError(f"y must have length n={self.n}, got {y.shape}")
        if x.shape != (self.n + 1,):
            raise ValueError(f"x must have length n+1={self.n + 1}, got {x.shape}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise ValueError("sample contains non-finite entries")

    @property
    def x_lag(self) -> np.ndarray:
        """x_{n,t-1} for t = 1..n."""
        return self.x[:-1]

    @property
    def dx(self) -> np.ndarray:
        """First differences of the emitted regressor, t = 1..n."""
        return np.diff(self.x)

    def with_y(self, y: np.ndarray) -> "TimeSeriesSample":
        """Copy of the sample with a new response (regressor kept fixed)."""
        return replace(self, y=np.asarray(y, dtype=float))


def generate_errors(
    kind: ErrorKind,
    n: int,
    rng: np.random.Generator,
    regressor_shocks: np.ndarray | None = None,
) -> np.ndarray:
    """Draw eps_1..eps_n for the requested error process.

    ``regressor_shocks`` is consulted only by :class:`CorrelatedWithRegressor`
    and must then have length ``n``.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if isinstance(kind, IidNormal):
        return rng.standard_normal(n)
    if isinstance(kind, Arch1):
        eps_prev = np.sqrt(kind.omega / (1.0 - kind.alpha)) * rng.standard_normal()
        nu = rng.standard_normal(n)
        eps = np.empty(n)
        for t in range(n):
            sigma2 = kind.omega + kind.alpha * eps_prev * eps_prev
            eps_prev = np.sqrt(sigma2) * nu[t]
            eps[t] = eps_prev
        return eps
    if isinstance(kind, CorrelatedWithRegressor):
        shocks = np.asarray(regressor_shocks, dtype=float)
        if shocks.shape != (n,):
            raise ValueError("correlated errors need regressor shocks of length n")
        eta = rng.standard_normal(n)
        return np.sqrt(kind.weight) * shocks + np.sqrt(1.0 - kind.weight) * eta
    raise TypeError(f"unknown error kind: {kind!r}")


def _regressor_path(
    kind: RegressorKind, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Return (emitted x of length n+1, underlying shocks of length n)."""
    if isinstance(kind, UnitRoot):
        shocks = rng.standard_normal(n)
        x = np.concatenate(([0.0], np.cumsum(shocks))) / np.sqrt(n)
        return x, shocks
    if isinstance(kind, NearUnitRoot):
        shocks = rng.standard_normal(n)
        phi = np.exp(-kind.c / n)
        path = lfilter([1.0], [1.0, -phi], shocks)
        x = np.concatenate(([0.0], path)) / np.sqrt(n)
        return x, shocks
    if isinstance(kind, Stationary):
        x0 = rng.standard_normal() / np.sqrt(1.0 - kind.rho**2)
        shocks = rng.standard_normal(n)
        path = lfilter([1.0], [1.0, -kind.rho], shocks)
        path += x0 * kind.rho ** np.arange(1, n + 1)
        x = np.concatenate(([x0], path))
        return x, shocks
    raise TypeError(f"unknown regressor kind: {kind!r}")


def generate_sample(
    regressor: RegressorKind,
    errors: ErrorKind,
    truth: TrueValue,
    n: int,
    rng: np.random.Generator,
) -> TimeSeriesSample:
    """Simulate one predictive-regression sample.

    The regressor shocks are drawn before the error shocks, so error kinds
    that ignore the regressor shocks consume the stream identically to the
    correlated kind.
    """
    if n < 10:
        raise ValueError("need n >= 10")
    x, shocks = _regressor_path(regressor, n, rng)
    eps = generate_errors(errors, n, rng, regressor_shocks=shocks)
    theta = truth.resolve(n)
    y = theta[0] + theta[1] * x[:-1] + eps
    return TimeSeriesSample(
        y=y,
        x=x,
        n=n,
        resolved_theta=theta,
        regressor=regressor,
        errors=errors,
        truth=truth,
    )
