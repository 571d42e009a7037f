"""Exceedance probabilities for the Dirichlet distribution.

Numerical integration over products of gamma CDFs, a seeded Monte-Carlo
estimator to check it against, and their use in Multinomial-Dirichlet
posterior inference and random-effects Bayesian model selection.
"""

from .bms import BmsResult, family_ep, vb_estimate, vb_step
from .dirichlet import (
    ExceedanceVector,
    SamplingConfig,
    agglomerate,
    dirichlet_mode,
    ep_auto,
    ep_batch,
    ep_bivariate,
    ep_integrand,
    ep_integration,
    ep_sampling,
    poll_posterior,
    posterior_from_counts,
    sample_dirichlet,
    sample_gamma,
    threshold_probability,
    validate_partition,
)
from .errors import ConvergenceError, DomainError, ModeUndefinedError, PartitionError
from .quadrature import QuadratureConfig, integrate, integrate_semi_infinite
from .special import digamma, ln_gamma, reg_inc_beta, reg_lower_inc_gamma

__version__ = "0.1.0"
