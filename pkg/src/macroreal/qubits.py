"""GHZ states, Svetlichny operator expectations and the bipartite hybrid bound.

Basis index bit ``k`` holds site ``k``'s sigma_z eigenvalue, bit value 0 for
spin up (+1) and 1 for spin down (-1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from macroreal.errors import InvalidArgumentError

MAX_DENSE_SITES = 14

# sigma_theta = sigma_x cos(theta) + sigma_y sin(theta)
STANDARD_ANGLES = (0.0, np.pi / 2)
# Last-site pair as usually printed; on (|up..up> - |down..down>)/sqrt2 it gives
# Re + Im = 0, so the default is the same pair advanced by pi/2.
PRINTED_LAST_SITE_ANGLES = (np.pi / 4, 3 * np.pi / 4)
LAST_SITE_ANGLES = (3 * np.pi / 4, 5 * np.pi / 4)


@dataclass(frozen=True)
class QubitRegisterState:
    n_sites: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n_sites:
            raise InvalidArgumentError(f"expected {2 ** self.n_sites} amplitudes, got {amps.size}")
        if abs(np.vdot(amps, amps).real - 1.0) > 1e-12:
            raise InvalidArgumentError("qubit register state is not normalised")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def tensor(self) -> np.ndarray:
        """Axis ``k`` is site ``k`` (index 0 = up)."""
        return self.amplitudes.reshape((2,) * self.n_sites, order="F")


@dataclass(frozen=True)
class SiteSetting:
    site: int
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(np.mod(self.angle, 2 * np.pi)))


@dataclass(frozen=True)
class SvetlichnyReport:
    N: int
    k: int
    quantum_value: float
    hybrid_bound: float
    violated: bool
    method: str  # "computed" or "closed-form"


def _check_sites(N):
    if not 2 <= N <= MAX_DENSE_SITES:
        raise InvalidArgumentError(f"N must be in 2..{MAX_DENSE_SITES}, got N={N}")


def _check_cut(N, k):
    if not 1 <= k <= N - 1:
        raise InvalidArgumentError(f"bipartition k must be in 1..{N - 1}, got k={k}")


def make_ghz(N: int) -> QubitRegisterState:
    """``(|up>^N - |down>^N)/sqrt(2)``."""
    _check_sites(N)
    amps = np.zeros(2**N, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    amps[-1] = -1 / np.sqrt(2)
    return QubitRegisterState(N, amps)


def product_up(N: int) -> QubitRegisterState:
    amps = np.zeros(2**N, dtype=complex)
    amps[0] = 1.0
    return QubitRegisterState(N, amps)


def sigma(theta: float) -> np.ndarray:
    return np.array([[0, np.exp(-1j * theta)], [np.exp(1j * theta), 0]])


def site_factor(angles=STANDARD_ANGLES) -> np.ndarray:
    """``F = sigma_a + i sigma_b`` for the pair ``angles = (a, b)``."""
    a, b = angles
    return sigma(a) + 1j * sigma(b)


def svetlichny_settings(N: int, last_site_angles=LAST_SITE_ANGLES) -> list[tuple[SiteSetting, SiteSetting]]:
    pairs = [STANDARD_ANGLES] * (N - 1) + [tuple(last_site_angles)]
    return [(SiteSetting(j, a), SiteSetting(j, b)) for j, (a, b) in enumerate(pairs)]


def product_operator_expectation(state: QubitRegisterState, factors) -> complex:
    """``<psi| F_0 (x) F_1 (x) ... |psi>`` for single-site 2x2 factors."""
    psi = state.tensor()
    out = psi
    for site, F in enumerate(factors):
        out = np.moveaxis(np.tensordot(F, out, axes=([1], [site])), 0, site)
    return complex(np.vdot(psi.reshape(-1), out.reshape(-1)))


def svetlichny_pi(state: QubitRegisterState, last_site_angles=LAST_SITE_ANGLES) -> complex:
    """``<Pi_N>`` with ``F_j = sigma_x + i sigma_y`` on all but the last site."""
    N = state.n_sites
    factors = [site_factor()] * (N - 1) + [site_factor(last_site_angles)]
    return product_operator_expectation(state, factors)


def svetlichny_value(state: QubitRegisterState, last_site_angles=LAST_SITE_ANGLES) -> float:
    """``<Re Pi_N> + <Im Pi_N>``."""
    if state.n_sites < 2:
        raise InvalidArgumentError("need at least 2 sites")
    pi = svetlichny_pi(state, last_site_angles)
    return float(pi.real + pi.imag)


def pi_operator(M: int, last_site_angles=None) -> np.ndarray:
    """Dense ``Pi_M`` on ``M`` sites (site 0 least significant); small M only."""
    factors = [site_factor()] * M
    if last_site_angles is not None:
        factors[-1] = site_factor(last_site_angles)
    out = np.array([[1.0 + 0j]])
    for F in factors:  # kron puts later factors on less significant bits
        out = np.kron(F, out)
    return out


def hybrid_bound(N: int, k: int) -> float:
    """Largest ``<Re Pi_N> + <Im Pi_N>`` for models local across the C|S cut.

    C holds ``N - k`` sites and S holds ``k``.  Each side may reach its
    algebraic bound ``|<Re Pi_M>|, |<Im Pi_M>| <= 2^(M-1)``; since
    ``Pi_N = Pi_C Pi_S`` factorises under the cut, the objective
    ``Re_C Re_S - Im_C Im_S + Re_C Im_S + Im_C Re_S`` is bilinear and its
    maximum over the product of boxes sits on one of the 16 vertices.
    Mixtures of such models cannot do better.
    """
    _check_cut(N, k)
    c = 2.0 ** (N - k - 1)
    s = 2.0 ** (k - 1)
    return max(_hybrid_objective(*v) for v in _box_vertices(c, s))


def _box_vertices(c, s):
    for sc1, sc2, ss1, ss2 in itertools.product((-1.0, 1.0), repeat=4):
        yield sc1 * c, sc2 * c, ss1 * s, ss2 * s


def _hybrid_objective(re_c, im_c, re_s, im_s):
    return re_c * re_s - im_c * im_s + re_c * im_s + im_c * re_s


def hybrid_optimum_vertex(N: int, k: int) -> tuple[float, float, float, float]:
    _check_cut(N, k)
    c, s = 2.0 ** (N - k - 1), 2.0 ** (k - 1)
    return max(_box_vertices(c, s), key=lambda v: _hybrid_objective(*v))


def svetlichny_report(N: int, k: int | None = None) -> SvetlichnyReport:
    """GHZ prediction against the hybrid bound for the cut ``(N-k) | k``.

    Beyond the dense-storage limit the closed forms are reported and flagged.
    """
    if N < 2:
        raise InvalidArgumentError(f"N must be >= 2, got N={N}")
    k = max(1, N // 2) if k is None else k
    _check_cut(N, k)
    bound = hybrid_bound(N, k)
    if N <= MAX_DENSE_SITES:
        value, method = svetlichny_value(make_ghz(N)), "computed"
    else:
        value, method = 2.0 ** (N - 0.5), "closed-form"
    return SvetlichnyReport(N, k, value, bound, value > bound + 1e-9, method)


def collective_z_distribution(state: QubitRegisterState, sites) -> dict[int, float]:
    """Distribution of ``sum_j sigma_z^(j)`` over the given sites."""
    probs = np.abs(state.tensor()) ** 2
    sites = list(sites)
    other = tuple(ax for ax in range(state.n_sites) if ax not in sites)
    marg = probs.sum(axis=other) if other else probs
    out: dict[int, float] = {}
    for idx in np.ndindex(marg.shape):
        p = float(marg[idx])
        if p > 0:
            total = len(idx) - 2 * sum(idx)
            out[total] = out.get(total, 0.0) + p
    return dict(sorted(out.items()))


def bipartition_inference_check(N: int, k: int, state: QubitRegisterState | None = None) -> float:
    """``P(M_C = N-k | O_S = k)``: the cat's collective spin inferred from S.

    C is the first ``N - k`` sites, S the last ``k``.  Defaults to GHZ(N).
    """
    _check_cut(N, k)
    state = make_ghz(N) if state is None else state
    if state.n_sites != N:
        raise InvalidArgumentError(f"state has {state.n_sites} sites, expected {N}")
    probs = np.abs(state.tensor()) ** 2
    c_sites, s_sites = range(N - k), range(N - k, N)
    joint = 0.0
    cond = 0.0
    for idx in np.ndindex(probs.shape):
        p = probs[idx]
        if p == 0:
            continue
        s_val = k - 2 * sum(idx[j] for j in s_sites)
        if s_val != k:
            continue
        cond += p
        if (N - k) - 2 * sum(idx[j] for j in c_sites) == N - k:
            joint += p
    if cond == 0:
        raise InvalidArgumentError(f"conditioning event O_S = {k} has zero probability")
    return float(joint / cond)
