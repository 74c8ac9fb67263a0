"""Three-region binning and the delta-graded CHSH combination."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from macroreal.errors import InvalidArgumentError
from macroreal.mlr.distributions import JointOutcomeDistribution

REGIONS = (1, 0, 2)
_INDEX = {r: i for i, r in enumerate(REGIONS)}


@dataclass(frozen=True)
class RegionBinning:
    """``x <= -delta`` is region 1, ``x >= delta`` region 2, the open middle region 0.

    At ``delta = 0`` the point ``x = 0`` goes to region 2, matching the sign
    binning ``x >= 0 -> +1``.
    """

    delta: float

    def __post_init__(self):
        if not self.delta >= 0:
            raise InvalidArgumentError(f"delta must be >= 0, got {self.delta}")

    def region_of(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.delta, 2, np.where(x <= -self.delta, 1, 0))


@dataclass(frozen=True)
class RegionTable:
    """Joint region probabilities ``P[r, s]``, rows/columns ordered (1, 0, 2)."""

    table: np.ndarray = field(repr=False)
    binning: RegionBinning

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.shape != (3, 3):
            raise InvalidArgumentError(f"region table must be 3x3, got {t.shape}")
        object.__setattr__(self, "table", t)

    def p(self, r: int, s: int) -> float:
        return float(self.table[_INDEX[r], _INDEX[s]])

    def union(self, rs_a, rs_b) -> float:
        """Probability that A lands in any of ``rs_a`` and B in any of ``rs_b``."""
        ia = [_INDEX[r] for r in rs_a]
        ib = [_INDEX[r] for r in rs_b]
        return float(self.table[np.ix_(ia, ib)].sum())

    @property
    def total(self) -> float:
        return float(self.table.sum())

    def middle_mass(self) -> tuple[float, float]:
        """Region-0 marginals at A and at B."""
        return float(self.table[_INDEX[0]].sum()), float(self.table[:, _INDEX[0]].sum())

    @property
    def K_lower(self) -> float:
        return self.p(2, 2) + self.p(1, 1) - self.union((1, 0), (2, 0)) - self.union((2, 0), (1, 0))

    @property
    def K_upper(self) -> float:
        return self.union((2, 0), (2, 0)) + self.union((1, 0), (1, 0)) - self.p(1, 2) - self.p(2, 1)


def region_probabilities(dist: JointOutcomeDistribution, binning: RegionBinning) -> RegionTable:
    ra = binning.region_of(dist.x)
    rb = binning.region_of(dist.y)
    table = np.zeros((3, 3))
    for r in REGIONS:
        rows = dist.probabilities[ra == r]
        for s in REGIONS:
            table[_INDEX[r], _INDEX[s]] = rows[:, rb == s].sum()
    return RegionTable(table, binning)


def modified_chsh(tables) -> float:
    """``E_delta = K^l_{t p} - K^u_{t p'} + K^l_{t' p} + K^l_{t' p'}``.

    ``tables`` holds the four RegionTables in the order
    ``(theta, phi), (theta, phi'), (theta', phi), (theta', phi')``.
    """
    tables = list(tables)
    if len(tables) != 4:
        raise InvalidArgumentError(f"need four setting pairs, got {len(tables)}")
    deltas = {t.binning.delta for t in tables}
    if len(deltas) != 1:
        raise InvalidArgumentError(f"tables use different binnings: delta in {sorted(deltas)}")
    t_p, t_pp, tp_p, tp_pp = tables
    return t_p.K_lower - t_pp.K_upper + tp_p.K_lower + tp_pp.K_lower
