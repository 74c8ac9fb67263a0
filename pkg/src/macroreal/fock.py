"""Truncated bosonic Fock-space algebra.

Conventions used throughout the package:

* Multi-mode amplitudes are stored flat with little-endian mode digits,
  ``index = n_0 + (cutoff+1) * n_1 + (cutoff+1)**2 * n_2 + ...``.
* Quadratures are ``x = (a + a^dag)/sqrt(2)`` and ``p = i(a^dag - a)/sqrt(2)``
  so that ``[x, p] = i`` and ``dx dp >= 1/2``.  The single-mode amplitude
  ``P = (a - a^dag)/i`` equals ``sqrt(2) p``.
* Rotated quadratures ``x_theta = x cos(theta) + p sin(theta)`` have
  eigenfunctions ``<x_theta|n> = exp(-i n theta) phi_n(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import schur
from scipy.special import gammaln

from macroreal.errors import InvalidArgumentError, NonConvergenceError

NORM_TOL = 1e-9


def _frozen(array, dtype=complex):
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockVector:
    """Pure state on ``modes`` bosonic modes, each truncated at ``cutoff`` photons."""

    cutoff: int
    modes: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.cutoff < 0 or self.modes < 1:
            raise InvalidArgumentError(
                f"need cutoff >= 0 and modes >= 1, got cutoff={self.cutoff}, modes={self.modes}"
            )
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != (self.cutoff + 1) ** self.modes:
            raise InvalidArgumentError(
                f"expected {(self.cutoff + 1) ** self.modes} amplitudes, got {amps.size}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"state is not normalised: |psi|^2 = {norm2!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes as an array whose axis ``k`` is the occupation of mode ``k``."""
        return self.amplitudes.reshape((self.cutoff + 1,) * self.modes, order="F")

    @classmethod
    def from_tensor(cls, tensor, cutoff: int | None = None) -> "FockVector":
        tensor = np.asarray(tensor, dtype=complex)
        cutoff = tensor.shape[0] - 1 if cutoff is None else cutoff
        return cls(cutoff, tensor.ndim, tensor.reshape(-1, order="F"))

    def number_distribution(self, mode: int = 0) -> np.ndarray:
        """Marginal photon-number distribution of one mode."""
        probs = np.abs(self.tensor()) ** 2
        other = tuple(ax for ax in range(self.modes) if ax != mode)
        return probs.sum(axis=other) if other else probs

    def embed(self, cutoff: int) -> "FockVector":
        """Same state in a larger truncated space."""
        if cutoff < self.cutoff:
            raise InvalidArgumentError(f"cannot embed cutoff {self.cutoff} into {cutoff}")
        big = np.zeros((cutoff + 1,) * self.modes, dtype=complex)
        big[(slice(0, self.cutoff + 1),) * self.modes] = self.tensor()
        return FockVector.from_tensor(big)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class ModeOperator:
    """Single-mode operator as a dense ``(cutoff+1) x (cutoff+1)`` matrix."""

    cutoff: int
    matrix: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        mat = _frozen(self.matrix)
        if mat.shape != (self.cutoff + 1, self.cutoff + 1):
            raise InvalidArgumentError(
                f"matrix shape {mat.shape} does not match cutoff {self.cutoff}"
            )
        object.__setattr__(self, "matrix", mat)

    def dagger(self) -> "ModeOperator":
        return ModeOperator(self.cutoff, self.matrix.conj().T, f"({self.label})^dag")

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        if self.cutoff != other.cutoff:
            raise InvalidArgumentError("cutoff mismatch in operator product")
        return ModeOperator(self.cutoff, self.matrix @ other.matrix, f"{self.label} {other.label}")

    def power(self, k: int) -> "ModeOperator":
        return ModeOperator(self.cutoff, np.linalg.matrix_power(self.matrix, k), f"({self.label})^{k}")

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=atol, rtol=0))


def annihilation(cutoff: int) -> ModeOperator:
    return ModeOperator(cutoff, np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1), "a")


def creation(cutoff: int) -> ModeOperator:
    return ModeOperator(cutoff, np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=-1), "a^dag")


def number(cutoff: int) -> ModeOperator:
    return ModeOperator(cutoff, np.diag(np.arange(cutoff + 1, dtype=float)), "n")


def identity(cutoff: int) -> ModeOperator:
    return ModeOperator(cutoff, np.eye(cutoff + 1), "1")


def position(cutoff: int) -> ModeOperator:
    a = annihilation(cutoff).matrix
    return ModeOperator(cutoff, (a + a.T) / np.sqrt(2), "x")


def momentum(cutoff: int) -> ModeOperator:
    a = annihilation(cutoff).matrix
    return ModeOperator(cutoff, 1j * (a.T - a) / np.sqrt(2), "p")


def amplitude_P(cutoff: int) -> ModeOperator:
    """``P = (a - a^dag)/i``, the amplitude used by the number-superposition criterion."""
    a = annihilation(cutoff).matrix
    return ModeOperator(cutoff, (a - a.T) / 1j, "P")


def rotated_quadrature(theta: float, cutoff: int) -> ModeOperator:
    x, p = position(cutoff).matrix, momentum(cutoff).matrix
    return ModeOperator(cutoff, np.cos(theta) * x + np.sin(theta) * p, f"x_{theta:g}")


# --------------------------------------------------------------------------
# State constructors
# --------------------------------------------------------------------------


def make_number_superposition(N: int, phase: float, cutoff: int) -> FockVector:
    """``(|N> + e^{i phase}|0>)/sqrt(2)``; the relative phase sits on the vacuum."""
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got N={N}")
    if cutoff < N:
        raise InvalidArgumentError(f"cutoff={cutoff} is below N={N}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = np.exp(1j * phase) / np.sqrt(2)
    amps[N] = 1 / np.sqrt(2)
    return FockVector(cutoff, 1, amps)


def make_noon(N: int, cutoff: int) -> FockVector:
    """``(|N,0> + |0,N>)/sqrt(2)`` on two modes."""
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got N={N}")
    if cutoff < N:
        raise InvalidArgumentError(f"cutoff={cutoff} is below N={N}")
    psi = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    psi[N, 0] = psi[0, N] = 1 / np.sqrt(2)
    return FockVector.from_tensor(psi)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Unnormalised-by-truncation coherent amplitudes ``e^{-|a|^2/2} a^n / sqrt(n!)``."""
    n = np.arange(cutoff + 1)
    if alpha == 0:
        out = np.zeros(cutoff + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_vector(alpha: complex, cutoff: int) -> tuple[FockVector, float]:
    """Coherent state truncated at ``cutoff`` and renormalised.

    Returns
    -------
    state : FockVector
    tail_mass : float
        Probability weight above the cutoff before renormalisation.
    """
    amps = coherent_amplitudes(alpha, cutoff)
    kept = float(np.sum(np.abs(amps) ** 2))
    # Summed directly so that tiny tails are not lost to cancellation in 1 - kept.
    tail = _poisson_tail(abs(alpha) ** 2, cutoff)
    return FockVector(cutoff, 1, amps / np.sqrt(kept)), tail


def _poisson_tail(mean: float, cutoff: int) -> float:
    if mean == 0:
        return 0.0
    n = np.arange(cutoff + 1, cutoff + 1 + 64 + int(10 * (mean + np.sqrt(mean))))
    logp = -mean + n * np.log(mean) - gammaln(n + 1)
    return float(np.sum(np.exp(logp)))


# --------------------------------------------------------------------------
# Two-mode passive linear optics
# --------------------------------------------------------------------------

BS_5050 = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2)


def _hermitian_generator(W: np.ndarray) -> np.ndarray:
    """Hermitian ``H`` with ``W = exp(iH)`` for a unitary 2x2 ``W``."""
    T, Z = schur(np.asarray(W, dtype=complex), output="complex")
    phases = np.angle(np.diag(T))
    return (Z * phases) @ Z.conj().T


def sector_unitaries(W: np.ndarray, max_total: int) -> list[np.ndarray]:
    """Fock-space representation of a two-mode linear transformation.

    ``W`` maps input mode operators to output ones (``c = W a``), so a single
    photon's amplitude vector transforms as ``psi -> W psi``.  Returns one
    matrix per total photon number ``T = 0..max_total`` in the basis
    ``|k, T-k>`` indexed by ``k``, the photon count in mode 0.
    """
    W = np.asarray(W, dtype=complex)
    if W.shape != (2, 2) or not np.allclose(W @ W.conj().T, np.eye(2), atol=1e-12):
        raise InvalidArgumentError("W must be a 2x2 unitary")
    H = _hermitian_generator(W)
    out = []
    for T in range(max_total + 1):
        k = np.arange(T + 1)
        hop = np.sqrt((k[:-1] + 1.0) * (T - k[:-1]))  # <k+1, T-k-1| c0^dag c1 |k, T-k>
        HT = np.diag(H[0, 0].real * k + H[1, 1].real * (T - k)).astype(complex)
        HT[k[1:], k[:-1]] += H[0, 1] * hop
        HT[k[:-1], k[1:]] += H[1, 0] * hop
        lam, Q = np.linalg.eigh(HT)
        out.append((Q * np.exp(1j * lam)) @ Q.conj().T)
    return out


def apply_two_mode_unitary(
    state: FockVector, W: np.ndarray, out_cutoff: int | None = None, leak_tol: float = 1e-10
) -> FockVector:
    """Apply the passive transformation ``c = W a`` to a two-mode state.

    Output photons above ``out_cutoff`` (default: the input cutoff) are
    discarded; if their weight exceeds ``leak_tol`` a NonConvergenceError is
    raised instead of silently renormalising.
    """
    if state.modes != 2:
        raise InvalidArgumentError(f"expected a 2-mode state, got {state.modes} modes")
    d = state.cutoff
    out_cutoff = d if out_cutoff is None else out_cutoff
    psi = state.tensor()
    out = np.zeros((out_cutoff + 1, out_cutoff + 1), dtype=complex)
    leaked = 0.0
    for T, U in enumerate(sector_unitaries(W, 2 * d)):
        k = np.arange(max(0, T - d), min(T, d) + 1)
        v = psi[k, T - k]
        if not np.any(v):
            continue
        w = U[:, k] @ v
        kk = np.arange(T + 1)
        ok = (kk <= out_cutoff) & (T - kk <= out_cutoff)
        out[kk[ok], T - kk[ok]] = w[ok]
        leaked += float(np.sum(np.abs(w[~ok]) ** 2))
    if leaked > leak_tol:
        raise NonConvergenceError(
            f"output cutoff {out_cutoff} drops probability {leaked:.3e}", tail_mass=leaked
        )
    out /= np.linalg.norm(out)
    return FockVector.from_tensor(out)


def beam_splitter_5050(state: FockVector, out_cutoff: int | None = None) -> FockVector:
    """50/50 beam splitter with outputs ``c+ = (a1+a2)/sqrt2``, ``c- = (-a1+a2)/sqrt2``.

    The result is expressed in the ``(c+, c-)`` number basis.
    """
    return apply_two_mode_unitary(state, BS_5050, out_cutoff)


# --------------------------------------------------------------------------
# Harmonic-oscillator eigenfunctions and overlaps
# --------------------------------------------------------------------------


def hermite_functions(max_n: int, x) -> np.ndarray:
    """``phi_n(x)`` for ``n = 0..max_n`` as a ``(max_n+1, len(x))`` array.

    Uses the three-term recurrence, which stays stable well past n = 150
    where explicit factorial normalisations overflow.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((max_n + 1, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x**2)
    if max_n >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, max_n):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def gauss_legendre_panels(a: float, b: float, width: float = 0.5, order: int = 20):
    """Composite Gauss-Legendre nodes and weights on ``[a, b]``."""
    if b <= a:
        return np.empty(0), np.empty(0)
    n_panels = max(1, int(np.ceil((b - a) / width)))
    edges = np.linspace(a, b, n_panels + 1)
    t, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def quadrature_extent(max_n: int) -> float:
    """Half-width beyond which every ``phi_n``, ``n <= max_n``, is negligible."""
    return float(np.sqrt(2.0 * max_n) + 6.0)


@dataclass(frozen=True)
class HermiteBasisCache:
    """Tabulated ``phi_n`` on a composite Gauss-Legendre rule over ``[-L, L]``."""

    max_n: int
    grid: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, max_n: int, width: float = 0.5, order: int = 20) -> "HermiteBasisCache":
        L = quadrature_extent(max_n)
        x, w = gauss_legendre_panels(-L, L, width, order)
        return cls(max_n, _frozen(x, float), _frozen(w, float), _frozen(hermite_functions(max_n, x), float))

    @property
    def extent(self) -> float:
        return quadrature_extent(self.max_n)

    def gram(self) -> np.ndarray:
        return (self.values * self.weights) @ self.values.T

    def interval_overlaps(self, a: float, b: float) -> np.ndarray:
        """Matrix of ``int_a^b phi_n phi_m dx``; infinite limits are clipped to the extent."""
        L = self.extent
        lo, hi = max(a, -L), min(b, L)
        x, w = gauss_legendre_panels(lo, hi)
        if x.size == 0:
            return np.zeros((self.max_n + 1, self.max_n + 1))
        phi = hermite_functions(self.max_n, x)
        return (phi * w) @ phi.T

    def half_line_overlaps(self) -> np.ndarray:
        return _half_line_matrix(self.max_n)

    def half_line_overlap(self, n: int, m: int) -> float:
        if not (0 <= n <= self.max_n and 0 <= m <= self.max_n):
            raise InvalidArgumentError(f"indices ({n}, {m}) outside 0..{self.max_n}")
        return float(_half_line_matrix(self.max_n)[n, m])


@lru_cache(maxsize=32)
def _half_line_matrix(max_n: int) -> np.ndarray:
    L = quadrature_extent(max_n)
    x, w = gauss_legendre_panels(0.0, L)
    phi = hermite_functions(max_n, x)
    G = (phi * w) @ phi.T
    G = 0.5 * (G + G.T)
    # Same-parity entries are fixed by symmetry; pin them to remove quadrature noise.
    n = np.arange(max_n + 1)
    even = (n[:, None] + n[None, :]) % 2 == 0
    G[even] = 0.0
    G[n, n] = 0.5
    G.setflags(write=False)
    return G


@lru_cache(maxsize=8)
def hermite_cache(max_n: int) -> HermiteBasisCache:
    return HermiteBasisCache.build(max_n)


def half_line_overlap(n: int, m: int, cache: HermiteBasisCache | None = None) -> float:
    """``G_nm = int_0^inf phi_n(x) phi_m(x) dx``."""
    if n < 0 or m < 0:
        raise InvalidArgumentError(f"indices must be non-negative, got ({n}, {m})")
    if cache is None:
        cache = hermite_cache(max(64, 32 * ((max(n, m) + 31) // 32)))
    return cache.half_line_overlap(n, m)


# --------------------------------------------------------------------------
# Expectation values
# --------------------------------------------------------------------------


def apply_mode_operator(tensor: np.ndarray, matrix: np.ndarray, mode: int) -> np.ndarray:
    moved = np.tensordot(matrix, tensor, axes=([1], [mode]))
    return np.moveaxis(moved, 0, mode)


def expectation(state: FockVector, op) -> complex:
    """``<psi|O|psi>``.

    ``op`` is a ModeOperator (single-mode states), a sequence with one
    ModeOperator or ``None`` (identity) per mode, or a full matrix acting on
    the flat amplitude vector.
    """
    if isinstance(op, ModeOperator):
        op = [op]
    if isinstance(op, np.ndarray):
        if op.shape != (state.dim, state.dim):
            raise InvalidArgumentError(f"operator shape {op.shape} vs state dimension {state.dim}")
        return complex(np.vdot(state.amplitudes, op @ state.amplitudes))
    ops: Sequence = list(op)
    if len(ops) != state.modes:
        raise InvalidArgumentError(f"{len(ops)} factors for a {state.modes}-mode state")
    psi = state.tensor()
    out = psi
    for mode, factor in enumerate(ops):
        if factor is None:
            continue
        if factor.cutoff != state.cutoff:
            raise InvalidArgumentError(
                f"operator cutoff {factor.cutoff} vs state cutoff {state.cutoff}"
            )
        out = apply_mode_operator(out, factor.matrix, mode)
    return complex(np.vdot(psi.reshape(-1), out.reshape(-1)))
