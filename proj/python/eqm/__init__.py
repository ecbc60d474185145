"""Equilibrium-measure toolkit.

Minimizes the log-interaction energy plus a squared 2-Wasserstein penalty over
probability measures, with supporting tools: exact/entropic optimal transport,
spectral and particle interaction energies, and a Metropolis sampler for the
quadratically confined log gas (semicircle law).
"""

from eqm._core import (
    fourier_energy,
    interaction_energy,
    ks_statistic,
    minimize_1d,
    sample_gas,
    semicircle_cdf,
    semicircle_density,
    solve_transport,
    wasserstein_d2,
)

__all__ = [
    "fourier_energy",
    "interaction_energy",
    "ks_statistic",
    "minimize_1d",
    "sample_gas",
    "semicircle_cdf",
    "semicircle_density",
    "solve_transport",
    "wasserstein_d2",
]
