"""Macroscopic-local-realism Bell tests with sign-binned and amplified quadratures."""

from macroreal.mlr.amplified import (
    amplified_joint_distribution,
    default_ancilla_cutoff,
    kolmogorov_distance,
    number_difference_povm,
    scaled_marginal_distance,
)
from macroreal.mlr.chsh import BellReport, chsh_E, optimize_chsh
from macroreal.mlr.distributions import JointOutcomeDistribution, MeasurementSetting, schwinger_gain
from macroreal.mlr.homodyne import joint_quadrature_pdf, marginal_cdf, sign_correlator
from macroreal.mlr.regions import RegionBinning, RegionTable, modified_chsh, region_probabilities
from macroreal.mlr.states import SchmidtDiagonalState, fock_pair, pair_coherent, vacuum

__all__ = [
    "BellReport",
    "JointOutcomeDistribution",
    "MeasurementSetting",
    "RegionBinning",
    "RegionTable",
    "SchmidtDiagonalState",
    "amplified_joint_distribution",
    "chsh_E",
    "default_ancilla_cutoff",
    "fock_pair",
    "joint_quadrature_pdf",
    "kolmogorov_distance",
    "marginal_cdf",
    "modified_chsh",
    "number_difference_povm",
    "optimize_chsh",
    "pair_coherent",
    "region_probabilities",
    "scaled_marginal_distance",
    "schwinger_gain",
    "sign_correlator",
    "vacuum",
]
