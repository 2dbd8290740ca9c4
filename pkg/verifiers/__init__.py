"""Correlation-inequality verifiers, the duplication machinery and the conjecture explorer."""

from .reports import (
    SLACK,
    IdentityReport,
    InequalityReport,
    MonotonicityError,
    NestingError,
    UrsellValue,
)
from .inequalities import (
    central_derivative,
    derivative_density_check,
    derivative_ursell_check,
    diagonal_identities,
    sweep_partition_submodularity,
    ursell,
    ursell_tensors,
    verify_alpha_sensitivity,
    verify_fkg_lattice,
    verify_fkg_monotone,
    verify_ghs,
    verify_ghs_exhaustive,
    verify_gks,
    verify_gks_exhaustive,
    verify_partition_submodularity,
    verify_volume_monotonicity,
)
from .conjecture import ConjecturePoint, atlas_summary, conjecture_scan
from .duplication import (
    DoubledState,
    MixtureWeights,
    check_decomposition,
    doubled_expectation,
    mixture_expectation,
    mixture_weights,
    to_zv,
    verify_ising_submodularity,
    verify_P_lattice,
    verify_sector_monotonicity,
    verify_u3_representation,
    verify_u3_representation_all,
    verify_zv_inequalities,
)

__all__ = [
    'SLACK',
    'IdentityReport',
    'InequalityReport',
    'MonotonicityError',
    'NestingError',
    'UrsellValue',
    'central_derivative',
    'derivative_density_check',
    'derivative_ursell_check',
    'diagonal_identities',
    'sweep_partition_submodularity',
    'ursell',
    'ursell_tensors',
    'verify_alpha_sensitivity',
    'verify_fkg_lattice',
    'verify_fkg_monotone',
    'verify_ghs',
    'verify_ghs_exhaustive',
    'verify_gks',
    'verify_gks_exhaustive',
    'verify_partition_submodularity',
    'verify_volume_monotonicity',
    'ConjecturePoint',
    'atlas_summary',
    'conjecture_scan',
    'DoubledState',
    'MixtureWeights',
    'check_decomposition',
    'doubled_expectation',
    'mixture_expectation',
    'mixture_weights',
    'to_zv',
    'verify_ising_submodularity',
    'verify_P_lattice',
    'verify_sector_monotonicity',
    'verify_u3_representation',
    'verify_u3_representation_all',
    'verify_zv_inequalities',
]
