from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, i0e

from macroreal.errors import InvalidArgumentError, NonConvergenceError

DEFAULT_R0 = 1.1
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class SchmidtDiagonalState:
    """Two-mode state ``sum_n c_n |n, n>`` with real coefficients."""

    coefficients: np.ndarray = field(repr=False)
    r0: float | None = None
    tail_mass: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        if abs(np.dot(c, c) - 1.0) > 1e-10:
            raise InvalidArgumentError(f"Schmidt coefficients not normalised: sum c^2 = {np.dot(c, c)!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def cutoff(self) -> int:
        return self.coefficients.size - 1

    def embed(self, cutoff: int) -> "SchmidtDiagonalState":
        if cutoff < self.cutoff:
            raise InvalidArgumentError(f"cannot embed cutoff {self.cutoff} into {cutoff}")
        c = np.zeros(cutoff + 1)
        c[: self.cutoff + 1] = self.coefficients
        return SchmidtDiagonalState(c, self.r0, self.tail_mass)


def pair_coherent_log_coefficients(r0: float, n: np.ndarray) -> np.ndarray:
    """``log c_n`` with ``c_n = r0^(2n) / (n! sqrt(I_0(2 r0^2)))``."""
    z = 2.0 * r0**2
    log_i0 = np.log(i0e(z)) + z
    return 2.0 * n * np.log(r0) - gammaln(n + 1) - 0.5 * log_i0


def pair_coherent(r0: float = DEFAULT_R0, cutoff: int = 16, tol: float = TAIL_TOL) -> SchmidtDiagonalState:
    """Pair coherent state, the ``zeta``-average of ``|r0 e^{i zeta}>|r0 e^{-i zeta}>``.

    Raises NonConvergenceError if the weight above ``cutoff`` reaches ``tol``.
    """
    if not r0 > 0:
        raise InvalidArgumentError(f"r0 must be positive, got {r0}")
    n = np.arange(cutoff + 1)
    c = np.exp(pair_coherent_log_coefficients(r0, n))
    tail_n = np.arange(cutoff + 1, cutoff + 200 + int(4 * r0**2))
    tail = float(np.sum(np.exp(2 * pair_coherent_log_coefficients(r0, tail_n))))
    if tail >= tol:
        raise NonConvergenceError(
            f"pair coherent state with r0={r0} needs a cutoff above {cutoff} (tail {tail:.3e})",
            tail_mass=tail,
        )
    return SchmidtDiagonalState(c / np.linalg.norm(c), r0, tail)


def fock_pair(n: int, cutoff: int) -> SchmidtDiagonalState:
    """Product state ``|n>|n>``."""
    c = np.zeros(cutoff + 1)
    c[n] = 1.0
    return SchmidtDiagonalState(c)


def vacuum(cutoff: int = 0) -> SchmidtDiagonalState:
    return fock_pair(0, cutoff)
