"""Type I and Type II cat signatures on truncated Fock states.

The Type I test is the variance-product criterion for number
superpositions ``(e^{i phi}|0> + |N>)/sqrt(2)``::

    (sum_i Var_i(n)) * Var(P^N) >= |<[n, P^N]>|^2 / 4

which every classical mixture of bin-confined quantum states obeys.  The
Type II-style NOON check is the coherence moment ``<a^dag^N b^N>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from macroreal.errors import InvalidArgumentError, NonConvergenceError
from macroreal.fock import FockVector, ModeOperator, amplitude_P, annihilation

Component = Union[FockVector, np.ndarray]


@dataclass(frozen=True)
class BinRule:
    """Two-bin split of an observable's outcomes: ``< boundary`` is bin 1, else bin 2."""

    observable: str
    boundary: float

    def bin_of(self, outcome: float) -> int:
        return 1 if outcome < self.boundary else 2


@dataclass(frozen=True)
class BinStats:
    weight: float
    mean: float
    variance: float


@dataclass(frozen=True)
class TypeIReport:
    N: int
    within_bin_variance_sum: float
    weighted_variant: float
    var_PN: float
    commutator_mean: complex
    lhs: float
    lhs_weighted: float
    rhs: float
    violated: bool
    bins: dict = field(default_factory=dict, repr=False)
    working_cutoff: int = 0


@dataclass(frozen=True)
class MixtureSpec:
    """Classical mixture ``sum_i P_i rho_i`` of pure states or density matrices."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), c) for w, c in self.components)
        if not comps:
            raise InvalidArgumentError("mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError(f"weights must be non-negative and sum to 1, got {weights.tolist()}")
        dims = {_dim(c) for _, c in comps}
        if len(dims) != 1:
            raise InvalidArgumentError(f"components have mismatched dimensions {sorted(dims)}")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    def density_matrix(self) -> np.ndarray:
        return sum(w * _density(c) for w, c in self.components)


def _dim(component: Component) -> int:
    if isinstance(component, FockVector):
        return component.dim
    return np.asarray(component).shape[0]


def _density(component: Component) -> np.ndarray:
    if isinstance(component, FockVector):
        return component.density_matrix()
    rho = np.asarray(component, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidArgumentError(f"density matrix must be square, got shape {rho.shape}")
    return rho


def as_density(state) -> np.ndarray:
    if isinstance(state, MixtureSpec):
        return state.density_matrix()
    return _density(state)


def _operator_matrix(op, dim: int) -> np.ndarray:
    if isinstance(op, ModeOperator):
        mat = op.matrix
    elif isinstance(op, np.ndarray):
        mat = op
    else:
        factors = list(op)
        d = factors[0].cutoff + 1
        mat = np.ones((1, 1))
        for f in factors:  # mode 0 is the least significant digit
            mat = np.kron(np.eye(d) if f is None else f.matrix, mat)
    if mat.shape != (dim, dim):
        raise InvalidArgumentError(f"operator shape {mat.shape} vs state dimension {dim}")
    return mat


def mixture_expectation(spec: MixtureSpec, op) -> complex:
    """``sum_i P_i <op>_i``."""
    mat = _operator_matrix(op, _dim(spec.components[0][1]))
    return complex(sum(w * np.trace(_density(c) @ mat) for w, c in spec.components))


def variance(state, op) -> float:
    rho = as_density(state)
    mat = _operator_matrix(op, rho.shape[0])
    mean = np.trace(rho @ mat)
    return float((np.trace(rho @ mat @ mat) - mean * mean).real)


# --------------------------------------------------------------------------
# Binned statistics
# --------------------------------------------------------------------------


def binned_conditional_stats(distribution, rule: BinRule, tol: float = 1e-9) -> dict[int, BinStats | None]:
    """Bin weights and conditional means/variances; empty bins map to ``None``.

    ``distribution`` is an outcome -> probability mapping, or a 1-D array
    whose index is the outcome.
    """
    if isinstance(distribution, Mapping):
        outcomes = np.array(list(distribution.keys()), dtype=float)
        probs = np.array(list(distribution.values()), dtype=float)
    else:
        probs = np.asarray(distribution, dtype=float)
        outcomes = np.arange(probs.size, dtype=float)
    deficit = 1.0 - probs.sum()
    if abs(deficit) > tol:
        raise InvalidArgumentError(f"distribution is not normalised (deficit {deficit:.3e})")
    in_bin1 = outcomes < rule.boundary
    out: dict[int, BinStats | None] = {}
    for label, mask in ((1, in_bin1), (2, ~in_bin1)):
        w = probs[mask].sum()
        if w <= 0:
            out[label] = None
            continue
        p, x = probs[mask], outcomes[mask]
        # shift to a supported outcome so a single-point bin gives exactly zero variance
        ref = x[np.argmax(p > 0)]
        shift = float(np.dot(p, x - ref) / w)
        var = float(np.dot(p, (x - ref - shift) ** 2) / w)
        mean = ref + shift
        out[label] = BinStats(float(w), mean, var)
    return out


# --------------------------------------------------------------------------
# Type I statistic
# --------------------------------------------------------------------------


def optimal_phase(N: int) -> float:
    """Relative phase maximising ``|<[n, P^N]>|`` on ``(e^{i phi}|0> + |N>)/sqrt2``."""
    return float(np.mod((N - 1) * np.pi / 2, 2 * np.pi))


def _embed(rho: np.ndarray, dim: int) -> np.ndarray:
    big = np.zeros((dim, dim), dtype=complex)
    big[: rho.shape[0], : rho.shape[1]] = rho
    return big


def type_one_statistic(
    state,
    N: int,
    rule: BinRule | None = None,
    headroom: int | None = None,
    tail_tol: float = 1e-12,
) -> TypeIReport:
    """Evaluate the variance-product criterion with ``M = n`` and ``B = P^N``.

    ``state`` may be a single-mode FockVector, a MixtureSpec, or a density
    matrix.  Operators are built at ``cutoff + headroom`` (default headroom
    ``2N``); if ``P^N`` acting on the state reaches above that level the
    result would be truncated and a NonConvergenceError is raised.
    """
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got N={N}")
    rule = BinRule("n", N / 2) if rule is None else rule
    headroom = 2 * N if headroom is None else headroom
    rho = as_density(state)
    cutoff = rho.shape[0] - 1
    D = cutoff + headroom

    # Exact P^N rho P^N lives below cutoff + N; its weight above D is the truncation loss.
    D_exact = cutoff + N
    P_exact = np.linalg.matrix_power(amplitude_P(D_exact).matrix, N)
    spread = P_exact @ _embed(rho, D_exact + 1) @ P_exact.conj().T
    tail = float(np.trace(spread[D + 1 :, D + 1 :]).real) if D < D_exact else 0.0
    if tail > tail_tol:
        raise NonConvergenceError(
            f"headroom {headroom} is too small for P^{N}: truncated weight {tail:.3e}", tail_mass=tail
        )

    rho_w = _embed(rho, D + 1)
    PN = np.linalg.matrix_power(amplitude_P(D).matrix, N)
    n_op = np.diag(np.arange(D + 1, dtype=float))
    mean_PN = np.trace(rho_w @ PN).real
    var_PN = float(np.trace(rho_w @ PN @ PN).real - mean_PN**2)
    comm_mean = complex(np.trace(rho_w @ (n_op @ PN - PN @ n_op)))

    bins = binned_conditional_stats(np.clip(np.diag(rho).real, 0, None), rule)
    present = [b for b in bins.values() if b is not None]
    var_sum = float(sum(b.variance for b in present))
    weighted = float(sum(b.weight * b.variance for b in present))
    lhs = var_sum * var_PN
    rhs = abs(comm_mean) ** 2 / 4
    return TypeIReport(
        N=N,
        within_bin_variance_sum=var_sum,
        weighted_variant=weighted,
        var_PN=var_PN,
        commutator_mean=comm_mean,
        lhs=lhs,
        lhs_weighted=weighted * var_PN,
        rhs=rhs,
        violated=bool(lhs < rhs - 1e-12),
        bins=bins,
        working_cutoff=D,
    )


# --------------------------------------------------------------------------
# NOON coherence moment
# --------------------------------------------------------------------------


def _lower_power(d: int, N: int) -> np.ndarray:
    return np.linalg.matrix_power(annihilation(d - 1).matrix, N)


def noon_moment(state, N: int) -> complex:
    """``<a^dag^N b^N>`` for a two-mode state (mode 0 is ``a``, mode 1 is ``b``).

    Evaluated as ``<a^N psi | b^N psi>``; lowering operators never leave the
    truncated space, so the value is exact whenever ``cutoff >= N``.
    """
    if isinstance(state, MixtureSpec):
        return complex(sum(w * noon_moment(c, N) for w, c in state.components))
    if isinstance(state, FockVector):
        if state.modes != 2:
            raise InvalidArgumentError(f"expected a 2-mode state, got {state.modes} modes")
        if state.cutoff < N:
            raise NonConvergenceError(f"cutoff {state.cutoff} < N={N}: moment not representable")
        psi = state.tensor()
        low = _lower_power(state.cutoff + 1, N)
        a_psi = low @ psi
        b_psi = psi @ low.T
        return complex(np.vdot(a_psi.reshape(-1), b_psi.reshape(-1)))
    rho = _density(state)
    d = int(round(np.sqrt(rho.shape[0])))
    if d * d != rho.shape[0]:
        raise InvalidArgumentError("density matrix dimension is not a two-mode square")
    if d - 1 < N:
        raise NonConvergenceError(f"cutoff {d - 1} < N={N}: moment not representable")
    low = _lower_power(d, N)
    a_low = np.kron(np.eye(d), low)  # little-endian: mode 0 is the fast index
    b_low = np.kron(low, np.eye(d))
    return complex(np.trace(rho @ a_low.conj().T @ b_low))


def noon_incoherent_mixture(N: int, cutoff: int) -> MixtureSpec:
    """``(|N,0><N,0| + |0,N><0,N|)/2``."""
    a = np.zeros((cutoff + 1, cutoff + 1))
    b = np.zeros_like(a)
    a[N, 0] = 1.0
    b[0, N] = 1.0
    return MixtureSpec(((0.5, FockVector.from_tensor(a)), (0.5, FockVector.from_tensor(b))))


def diagonal_mixture(levels: Sequence[int], weights: Sequence[float], cutoff: int) -> MixtureSpec:
    comps = []
    for n, w in zip(levels, weights):
        amps = np.zeros(cutoff + 1)
        amps[n] = 1.0
        comps.append((w, FockVector(cutoff, 1, amps)))
    return MixtureSpec(tuple(comps))
