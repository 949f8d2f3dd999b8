"""Dense 2x2 helpers: symmetric matrix roots and M-metric half-plane projection.

The projection onto ``{lam : g_dot' lam >= rhs}`` in the norm ``||x||_M =
sqrt(x' M x)`` has the closed form

    P_perp v + M^{-1} g_dot (g_dot' M^{-1} g_dot)^{-1} * max(rhs, g_dot' v),

where ``P_perp = g_perp (g_perp' M g_perp)^{-1} g_perp' M`` and ``g_perp``
is any nonzero vector orthogonal to ``g_dot``.  The two terms form an
oblique decomposition of the identity, so the map is the identity whenever
``g_dot' v >= rhs``.
"""

from __future__ import annotations

import numpy as np

COND_LIMIT = 1e12


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a moment matrix is singular or numerically close to it."""


def check_pd(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Validate that ``m`` is symmetric positive definite and well conditioned."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValueError(f"{what} must be 2x2, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-10 * (1.0 + abs(m).max())):
        raise ValueError(f"{what} must be symmetric")
    eigvals = np.linalg.eigvalsh(m)
    if eigvals[0] <= 0.0 or eigvals[1] / eigvals[0] > COND_LIMIT:
        raise SingularMatrixError(
            f"{what} is singular or near-singular (eigenvalues {eigvals})"
        )
    return m


def sym_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric (spectral) square root of a symmetric PD matrix."""
    w, v = np.linalg.eigh(np.asarray(m, dtype=float))
    if w[0] <= 0.0:
        raise SingularMatrixError(f"matrix not positive definite (eigenvalues {w})")
    return (v * np.sqrt(w)) @ v.T


def sym_inv_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric inverse square root of a symmetric PD matrix."""
    w, v = np.linalg.eigh(np.asarray(m, dtype=float))
    if w[0] <= 0.0:
        raise SingularMatrixError(f"matrix not positive definite (eigenvalues {w})")
    return (v / np.sqrt(w)) @ v.T


def perp(v: np.ndarray) -> np.ndarray:
    """Counterclockwise 90-degree rotation; same Euclidean norm as ``v``."""
    v = np.asarray(v, dtype=float)
    return np.array([-v[1], v[0]])


def halfplane_projector(m: np.ndarray, g_dot: np.ndarray):
    """Precompute the pieces of the M-metric half-plane projection.

    Returns ``(p_perp, q)`` such that the projection of ``v`` onto
    ``{lam : g_dot' lam >= rhs}`` is ``p_perp @ v + q * max(rhs, g_dot' v)``.
    """
    m = np.asarray(m, dtype=float)
    g_dot = np.asarray(g_dot, dtype=float)
    if not np.any(g_dot):
        raise ValueError("constraint gradient must be nonzero")
    g_perp = perp(g_dot)
    mg_perp = m @ g_perp
    p_perp = np.outer(g_perp, mg_perp) / (g_perp @ mg_perp)
    minv_g = np.linalg.solve(m, g_dot)
    q = minv_g / (g_dot @ minv_g)
    return p_perp, q


def project_halfplane_core(
    v: np.ndarray, m: np.ndarray, g_dot: np.ndarray, rhs: float
) -> np.ndarray:
    """M-metric projection of ``v`` (shape ``(..., 2)``) onto ``g_dot' lam >= rhs``."""
    v = np.asarray(v, dtype=float)
    p_perp, q = halfplane_projector(m, g_dot)
    slack = np.maximum(rhs, v @ np.asarray(g_dot, dtype=float))
    return v @ p_perp.T + np.multiply.outer(slack, q)
