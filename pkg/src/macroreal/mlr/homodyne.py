"""Ideal homodyne statistics of Schmidt-diagonal two-mode states.

For ``|psi> = sum_n c_n |n, n>`` the joint quadrature wavefunction is
``sum_n c_n e^{-i n s} phi_n(x) phi_n(y)`` with ``s = theta_A + theta_B``,
so every joint statistic depends on the angles only through their sum.
Binned probabilities are bilinear in the overlap matrices of the bins::

    P(x in I, y in J) = sum_{n,m} c_n c_m cos((n - m) s) O^I_nm O^J_nm
"""

from __future__ import annotations

import numpy as np

from macroreal.errors import InvalidArgumentError, NonConvergenceError
from macroreal.fock import gauss_legendre_panels, hermite_cache, hermite_functions, quadrature_extent
from macroreal.mlr.distributions import JointOutcomeDistribution, MeasurementSetting
from macroreal.mlr.states import SchmidtDiagonalState

GRID_POINTS = 401
NORM_TOL = 1e-4


def default_grid(cutoff: int, points: int = GRID_POINTS) -> np.ndarray:
    L = quadrature_extent(cutoff)
    return np.linspace(-L, L, points)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def joint_quadrature_pdf(
    state: SchmidtDiagonalState,
    theta_a: float,
    theta_b: float,
    grid: np.ndarray | None = None,
    points: int = GRID_POINTS,
) -> JointOutcomeDistribution:
    """Joint density of ``x_{theta_A}`` at A and ``x_{theta_B}`` at B on a grid.

    ``probabilities`` holds density times trapezoid weights.  A normalisation
    deficit above 1e-4 means the grid is too short or too coarse.
    """
    c = state.coefficients
    x = default_grid(state.cutoff, points) if grid is None else np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise InvalidArgumentError("grid must be a strictly increasing 1-D array")
    phi = hermite_functions(state.cutoff, x)
    phase = np.exp(-1j * np.arange(c.size) * (theta_a + theta_b))
    amp = (phi.T * (c * phase)) @ phi
    density = np.abs(amp) ** 2
    w = _trapezoid_weights(x)
    mass = density * np.outer(w, w)
    deficit = 1.0 - mass.sum()
    if abs(deficit) > NORM_TOL:
        raise NonConvergenceError(
            f"quadrature grid under-resolved: normalisation deficit {deficit:.3e} "
            f"({x.size} points on [{x[0]:.3g}, {x[-1]:.3g}])",
            deficit=deficit,
        )
    settings = (MeasurementSetting("A", theta_a), MeasurementSetting("B", theta_b))
    return JointOutcomeDistribution(x, x.copy(), mass, settings, 0.0, "grid", density)


# --------------------------------------------------------------------------
# Analytic binned statistics
# --------------------------------------------------------------------------


def _overlap_basis(cutoff: int):
    return hermite_cache(max(cutoff, 1))


def region_overlaps(cutoff: int, delta: float) -> dict[int, np.ndarray]:
    """Overlap matrices of the regions ``x <= -delta`` (1), ``|x| < delta`` (0), ``x >= delta`` (2)."""
    if delta < 0:
        raise InvalidArgumentError(f"delta must be >= 0, got {delta}")
    cache = _overlap_basis(cutoff)
    d = cutoff + 1
    if delta == 0:
        o2 = np.array(cache.half_line_overlaps()[:d, :d])
    else:
        o2 = cache.interval_overlaps(delta, np.inf)[:d, :d]
    parity = (-1.0) ** np.arange(d)
    o1 = parity[:, None] * o2 * parity[None, :]
    o0 = np.eye(d) - o1 - o2
    if delta == 0:
        o0 = np.zeros((d, d))
    return {1: o1, 0: o0, 2: o2}


def _pair_weights(c: np.ndarray, s: float) -> np.ndarray:
    n = np.arange(c.size)
    return np.outer(c, c) * np.cos((n[:, None] - n[None, :]) * s)


def sign_matrix(cutoff: int) -> np.ndarray:
    """``int sign(x) phi_n phi_m dx``: ``2 G_nm`` for odd ``n + m``, zero otherwise."""
    G = _overlap_basis(cutoff).half_line_overlaps()[: cutoff + 1, : cutoff + 1]
    n = np.arange(cutoff + 1)
    odd = (n[:, None] + n[None, :]) % 2 == 1
    return np.where(odd, 2.0 * G, 0.0)


def correlator_fourier(state: SchmidtDiagonalState) -> np.ndarray:
    """Cosine coefficients ``a_d`` with ``K(s) = sum_d a_d cos(d s)``."""
    c = state.coefficients
    S2 = sign_matrix(state.cutoff) ** 2
    terms = np.outer(c, c) * S2
    a = np.zeros(c.size)
    for d in range(1, c.size):
        a[d] = 2.0 * np.trace(terms, offset=d)
    return a


def correlator_from_fourier(a: np.ndarray, s) -> np.ndarray:
    d = np.arange(a.size)
    return np.cos(np.multiply.outer(s, d)) @ a


def correlator_derivative(a: np.ndarray, s) -> np.ndarray:
    d = np.arange(a.size)
    return -np.sin(np.multiply.outer(s, d)) @ (d * a)


def sign_correlator(state: SchmidtDiagonalState, theta_a: float, theta_b: float) -> float:
    """``K = E[sign(x_A) sign(x_B)]`` with sign(0) = +1, from half-line overlaps."""
    return float(correlator_from_fourier(correlator_fourier(state), theta_a + theta_b))


def ideal_region_table(state: SchmidtDiagonalState, theta_a: float, theta_b: float, delta: float) -> np.ndarray:
    """3x3 table ``P[r, s]`` with regions ordered (1, 0, 2) at each site."""
    O = region_overlaps(state.cutoff, delta)
    w = _pair_weights(state.coefficients, theta_a + theta_b)
    order = (1, 0, 2)
    return np.array([[np.sum(w * O[r] * O[t]) for t in order] for r in order])


def marginal_cdf(state: SchmidtDiagonalState, points) -> np.ndarray:
    """CDF of one site's quadrature, ``sum_n c_n^2 int_{-inf}^x phi_n^2``.

    The marginal is the same for every angle.  Integrated panel by panel
    between the sorted query points.
    """
    pts = np.asarray(points, dtype=float)
    order = np.argsort(pts)
    xs = pts[order]
    p2 = state.coefficients**2
    L = quadrature_extent(state.cutoff)
    edges = np.concatenate(([-L], np.clip(xs, -L, L)))
    pieces = np.empty(xs.size)
    for i in range(xs.size):
        x, w = gauss_legendre_panels(edges[i], edges[i + 1])
        if x.size == 0:
            pieces[i] = 0.0
            continue
        phi = hermite_functions(state.cutoff, x)
        pieces[i] = float(p2 @ (phi**2 @ w))
    cdf = np.minimum(np.cumsum(pieces), 1.0)
    cdf[xs >= L] = 1.0
    out = np.empty_like(cdf)
    out[order] = cdf
    return out
