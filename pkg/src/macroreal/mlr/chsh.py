"""CHSH combination of sign-binned correlators and its optimisation.

    E = K(theta, phi) - K(theta, phi') + K(theta', phi) + K(theta', phi')

Local realism bounds E by 2.  For Schmidt-diagonal states every K depends
on the angle sum only, so the optimiser searches the three free sums
``s1 = theta + phi``, ``s2 = theta + phi'``, ``s3 = theta' + phi``
(the fourth is ``s2 + s3 - s1``) and reports representative angles with
``theta = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from macroreal.errors import InvalidArgumentError
from macroreal.mlr.amplified import amplified_joint_distribution, default_ancilla_cutoff
from macroreal.mlr.homodyne import (
    correlator_derivative,
    correlator_fourier,
    correlator_from_fourier,
    ideal_region_table,
    sign_correlator,
)
from macroreal.mlr.regions import RegionBinning, RegionTable, modified_chsh, region_probabilities
from macroreal.mlr.states import SchmidtDiagonalState

PAIR_KEYS = ("tp", "tpp", "tpt", "tptp")


@dataclass(frozen=True)
class BellReport:
    """Correlators keyed by setting pair: ``tp`` = (theta, phi), ``tpp`` =
    (theta, phi'), ``tpt`` = (theta', phi), ``tptp`` = (theta', phi')."""

    angles: tuple
    K: dict
    E: float
    alpha: float = 0.0
    cutoff_signal: int = 0
    cutoff_ancilla: int = 0
    delta: float | None = None
    E_delta: float | None = None
    tables: dict = field(default_factory=dict, repr=False)

    @property
    def violated(self) -> bool:
        return self.E > 2.0

    @property
    def violated_delta(self) -> bool:
        return self.E_delta is not None and self.E_delta > 2.0

    @property
    def P0_max(self) -> float:
        """Largest region-0 marginal over the four setting pairs and both sites."""
        if not self.tables:
            return float("nan")
        return max(max(t.middle_mass()) for t in self.tables.values())

    def K_bounds(self) -> dict:
        return {k: (t.K_lower, t.K_upper) for k, t in self.tables.items()}


def _pairs(theta, theta_p, phi, phi_p):
    return dict(zip(PAIR_KEYS, ((theta, phi), (theta, phi_p), (theta_p, phi), (theta_p, phi_p))))


def _combine(K: dict) -> float:
    return K["tp"] - K["tpp"] + K["tpt"] + K["tptp"]


def chsh_E(
    state: SchmidtDiagonalState,
    theta: float,
    theta_p: float,
    phi: float,
    phi_p: float,
    alpha: float = 0.0,
    ancilla_cutoff: int | None = None,
    delta: float | None = None,
    signal_cutoff: int | None = None,
) -> BellReport:
    """CHSH value at the given angles.

    ``alpha == 0`` is the ideal homodyne limit, evaluated analytically;
    ``alpha > 0`` uses the amplified number-difference measurement with
    sign binning at ``J >= 0``.  With ``delta`` the three-region tables and
    ``E_delta`` are filled in (``delta`` in quadrature units for ``alpha == 0``,
    in units of ``J`` otherwise).
    """
    if alpha < 0:
        raise InvalidArgumentError(f"alpha must be >= 0, got {alpha}")
    pairs = _pairs(theta, theta_p, phi, phi_p)
    tables: dict[str, RegionTable] = {}
    if alpha == 0:
        K = {k: sign_correlator(state, a, b) for k, (a, b) in pairs.items()}
        Na, Ns = 0, state.cutoff
        if delta is not None:
            binning = RegionBinning(delta)
            tables = {k: RegionTable(ideal_region_table(state, a, b, delta), binning) for k, (a, b) in pairs.items()}
    else:
        Na = default_ancilla_cutoff(alpha) if ancilla_cutoff is None else ancilla_cutoff
        Ns = state.cutoff if signal_cutoff is None else signal_cutoff
        dists = {k: amplified_joint_distribution(state, alpha, a, b, Ns, Na) for k, (a, b) in pairs.items()}
        K = {k: d.sign_correlator() for k, d in dists.items()}
        if delta is not None:
            binning = RegionBinning(delta)
            tables = {k: region_probabilities(d, binning) for k, d in dists.items()}
    E_delta = modified_chsh(tables[k] for k in PAIR_KEYS) if tables else None
    return BellReport(
        angles=(theta, theta_p, phi, phi_p),
        K=K,
        E=_combine(K),
        alpha=float(alpha),
        cutoff_signal=Ns,
        cutoff_ancilla=Na,
        delta=delta,
        E_delta=E_delta,
        tables=tables,
    )


def _sum_objective(a: np.ndarray):
    def f(v):
        s1, s2, s3 = v
        s = np.array([s1, s2, s3, s2 + s3 - s1])
        K = correlator_from_fourier(a, s)
        dK = correlator_derivative(a, s)
        val = K[0] - K[1] + K[2] + K[3]
        grad = np.array([dK[0] - dK[3], -dK[1] + dK[3], dK[2] + dK[3]])
        return -val, -grad

    return f


def optimize_chsh(state: SchmidtDiagonalState, resolution: int = 64, tol: float = 1e-12) -> BellReport:
    """Maximise the ideal-homodyne E over the angle sums.

    Exhaustive search on a ``resolution^3`` grid of the sums, then BFGS with
    the analytic gradient from the best grid point.  Deterministic.
    """
    if resolution < 4:
        raise InvalidArgumentError(f"resolution must be >= 4, got {resolution}")
    a = correlator_fourier(state)
    R = resolution
    grid = 2 * np.pi * np.arange(R) / R
    Kg = correlator_from_fourier(a, grid)
    i, j, l = np.ix_(np.arange(R), np.arange(R), np.arange(R))
    E = Kg[i] - Kg[j] + Kg[l] + Kg[(j + l - i) % R]
    best = np.unravel_index(int(np.argmax(E)), E.shape)
    x0 = grid[list(best)]
    res = minimize(_sum_objective(a), x0, jac=True, method="BFGS", options={"gtol": tol})
    s1, s2, s3 = np.mod(res.x, 2 * np.pi) if -res.fun >= E[best] else x0
    return chsh_E(state, 0.0, float(np.mod(s3 - s1, 2 * np.pi)), float(s1), float(s2))
