from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from macroreal.errors import InvalidArgumentError


def schwinger_gain(alpha: float) -> float:
    """Scale between the number difference ``J`` and the signal quadrature.

    With the ancilla replaced by a real amplitude ``alpha``,
    ``J = (alpha / 2)(e^{i t} a^dag + e^{-i t} a) = (alpha / sqrt 2) x_t``.
    """
    return alpha / np.sqrt(2.0)


@dataclass(frozen=True)
class MeasurementSetting:
    """Quadrature angle measured at one site.

    The amplified apparatus realises quadrature angle ``angle`` with its
    polarisation rotation at ``angle / 2`` and phase ``pi / 2``.
    """

    site: str
    angle: float

    def __post_init__(self):
        if self.site not in ("A", "B"):
            raise InvalidArgumentError(f"site must be 'A' or 'B', got {self.site!r}")
        object.__setattr__(self, "angle", float(np.mod(self.angle, 2 * np.pi)))

    @property
    def rotation_angle(self) -> float:
        return self.angle / 2

    @property
    def phase(self) -> float:
        return np.pi / 2


@dataclass(frozen=True)
class JointOutcomeDistribution:
    """Joint outcome masses ``probabilities[i, j]`` for outcomes ``(x[i], y[j])``.

    ``kind`` is ``"grid"`` for a sampled continuous density (masses are
    density times quadrature weights, and ``density`` is kept) or
    ``"discrete"`` for number-difference outcomes.  ``alpha == 0`` marks the
    ideal homodyne limit.
    """

    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)
    settings: tuple
    alpha: float = 0.0
    kind: str = "grid"
    density: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (len(self.x), len(self.y)):
            raise InvalidArgumentError(f"probability table {p.shape} vs axes ({len(self.x)}, {len(self.y)})")
        if np.any(p < -1e-12):
            raise InvalidArgumentError("negative probability mass")

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    def marginal(self, site: str) -> np.ndarray:
        return self.probabilities.sum(axis=1 if site == "A" else 0)

    def sign_correlator(self) -> float:
        """``E[S_A S_B]`` with ``S = +1`` for outcomes ``>= 0``."""
        sx = np.where(self.x >= 0, 1.0, -1.0)
        sy = np.where(self.y >= 0, 1.0, -1.0)
        return float(sx @ self.probabilities @ sy)

    def transpose(self) -> "JointOutcomeDistribution":
        density = None if self.density is None else self.density.T
        return JointOutcomeDistribution(
            self.y, self.x, self.probabilities.T, self.settings[::-1], self.alpha, self.kind, density
        )
