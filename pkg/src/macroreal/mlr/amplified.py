"""Amplified quadrature measurement via a number difference.

At each site the signal mode and a coherent ancilla ``|alpha>`` (real alpha)
meet on a 50/50 beam splitter, giving ``c+`` and ``c-``.  A polarisation
rotation then gives

    c1 = -sin(t) c+ + e^{i p} cos(t) c-,    c2 = cos(t) c+ + e^{i p} sin(t) c-

and the outcome is ``J = (n2 - n1) / 2``.  With ``p = pi/2`` and the ancilla
treated classically ``J = (alpha / sqrt 2) x_{2t}``, so quadrature angle
``theta`` uses ``t = theta / 2``.

Tracing the ancilla out gives a POVM ``{E_j}`` on the signal mode.  ``J``
runs over half-integers; outcomes are indexed by ``2J``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from macroreal.errors import InvalidArgumentError, NonConvergenceError
from macroreal.fock import BS_5050, _poisson_tail, coherent_amplitudes, sector_unitaries
from macroreal.mlr.distributions import JointOutcomeDistribution, MeasurementSetting, schwinger_gain
from macroreal.mlr.homodyne import marginal_cdf
from macroreal.mlr.states import SchmidtDiagonalState

COMPLETENESS_TOL = 1e-4


def default_ancilla_cutoff(alpha: float) -> int:
    """Poisson tail bound ``alpha^2 + 6 alpha + 9``."""
    return int(np.ceil(alpha**2 + 6 * abs(alpha) + 9))


def site_mode_matrix(theta: float, phase: float = np.pi / 2) -> np.ndarray:
    """``W`` with ``(c1, c2) = W (a_signal, a_ancilla)`` for quadrature angle ``theta``."""
    t = theta / 2
    c, s = np.cos(t), np.sin(t)
    e = np.exp(1j * phase)
    R = np.array([[-s, e * c], [c, e * s]])
    return R @ BS_5050


@lru_cache(maxsize=64)
def _povm_cached(alpha: float, theta: float, signal_cutoff: int, ancilla_cutoff: int):
    Ns, Na = signal_cutoff, ancilla_cutoff
    anc = coherent_amplitudes(alpha, Na).real
    T_max = Ns + Na
    E = np.zeros((2 * T_max + 1, Ns + 1, Ns + 1), dtype=complex)
    for T, U in enumerate(sector_unitaries(site_mode_matrix(theta), T_max)):
        n = np.arange(max(0, T - Na), min(T, Ns) + 1)
        # amplitude of output |k1, T-k1> given signal |n> and the ancilla
        A = np.zeros((T + 1, Ns + 1), dtype=complex)
        A[:, n] = U[:, n] * anc[T - n]
        k1 = np.arange(T + 1)
        np.add.at(E, T - 2 * k1 + T_max, np.conj(A)[:, :, None] * A[:, None, :])
    keep = np.flatnonzero(np.abs(E).reshape(E.shape[0], -1).max(axis=1) > 0)
    two_j = keep - T_max
    E = E[keep]
    E.setflags(write=False)
    two_j.setflags(write=False)
    return two_j, E


def number_difference_povm(alpha: float, theta: float, signal_cutoff: int, ancilla_cutoff: int | None = None):
    """POVM elements on the truncated signal space.

    Returns ``(two_j, E)`` with ``E[i]`` the element for ``J = two_j[i] / 2``.
    Cached per ``(alpha, theta, cutoffs)``; lookups are read-only and a
    duplicate computation under concurrency gives identical arrays.
    Raises NonConvergenceError if ``sum_j E_j`` misses the identity by more
    than 1e-4 (the ancilla Poisson tail).
    """
    if alpha < 0:
        raise InvalidArgumentError(f"alpha must be real and >= 0, got {alpha}")
    Na = default_ancilla_cutoff(alpha) if ancilla_cutoff is None else int(ancilla_cutoff)
    theta = float(np.mod(theta, 2 * np.pi))
    two_j, E = _povm_cached(float(alpha), theta, int(signal_cutoff), Na)
    deficit = completeness_deficit(E)
    if deficit > COMPLETENESS_TOL:
        raise NonConvergenceError(
            f"POVM completeness deficit {deficit:.3e}: ancilla cutoff {Na} is too small for alpha={alpha}",
            deficit=deficit,
            ancilla_cutoff=Na,
            tail_mass=_poisson_tail(alpha**2, Na),
        )
    return two_j, E


def completeness_deficit(E: np.ndarray) -> float:
    total = E.sum(axis=0)
    return float(np.abs(total - np.eye(total.shape[0])).max())


def amplified_joint_distribution(
    state: SchmidtDiagonalState,
    alpha: float,
    theta_a: float,
    theta_b: float,
    signal_cutoff: int | None = None,
    ancilla_cutoff: int | None = None,
) -> JointOutcomeDistribution:
    """Joint law of ``(J_A, J_B)``; axes hold the half-integer ``J`` values."""
    Ns = state.cutoff if signal_cutoff is None else signal_cutoff
    if Ns < state.cutoff:
        raise InvalidArgumentError(f"signal cutoff {Ns} below the state cutoff {state.cutoff}")
    c = state.embed(Ns).coefficients
    ja, Ea = number_difference_povm(alpha, theta_a, Ns, ancilla_cutoff)
    jb, Eb = number_difference_povm(alpha, theta_b, Ns, ancilla_cutoff)
    cc = np.outer(c, c)
    P = np.einsum("nm,jnm,knm->jk", cc, Ea, Eb, optimize=True).real
    P = np.clip(P, 0.0, None)
    settings = (MeasurementSetting("A", theta_a), MeasurementSetting("B", theta_b))
    return JointOutcomeDistribution(ja / 2.0, jb / 2.0, P, settings, float(alpha), "discrete")


def kolmogorov_distance(values: np.ndarray, masses: np.ndarray, state: SchmidtDiagonalState) -> float:
    """Sup distance between a discrete law and the ideal quadrature marginal CDF."""
    order = np.argsort(values)
    x = np.asarray(values, dtype=float)[order]
    p = np.asarray(masses, dtype=float)[order]
    C = np.cumsum(p)
    F = marginal_cdf(state, x)
    before = np.concatenate(([0.0], C[:-1]))
    return float(max(np.abs(C - F).max(), np.abs(before - F).max()))


def scaled_marginal_distance(
    state: SchmidtDiagonalState,
    alpha: float,
    theta: float = 0.0,
    scale: float | None = None,
    ancilla_cutoff: int | None = None,
) -> float:
    """KS distance between the law of ``J / scale`` and the ideal ``x_theta`` law.

    ``scale`` defaults to the gain ``alpha / sqrt 2``.
    """
    scale = schwinger_gain(alpha) if scale is None else scale
    two_j, E = number_difference_povm(alpha, theta, state.cutoff, ancilla_cutoff)
    c2 = state.coefficients**2
    masses = np.einsum("n,jnn->j", c2, E).real
    return kolmogorov_distance(two_j / 2.0 / scale, masses, state)
