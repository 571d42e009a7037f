"""Random-effects Bayesian model selection by variational Bayes.

Input is an N x M matrix of log model evidences (subjects x models).  The
fixed point

    u_ij  = exp(lme_ij + psi(alpha_j) - psi(sum(alpha)))
    alpha = alpha0 + sum_i u_ij / sum_j u_ij

gives a Dirichlet posterior over model frequencies in the population.
"""

from dataclasses import dataclass

import numpy as np

from .dirichlet import ExceedanceVector, agglomerate, as_alpha, ep_auto
from .quadrature import DEFAULT_CONFIG
from .special import _digamma


@dataclass
class BmsResult:
    alpha_post: np.ndarray
    expected_freq: np.ndarray
    exceedance: ExceedanceVector
    iterations: int
    converged: bool


def as_lme(lme):
    """Validate a log-evidence matrix: 2-D, finite, at least 2 models."""
    try:
        m = np.asarray(lme, dtype=float)
    except ValueError as exc:
        # ragged nested lists land here
        raise ValueError(f"log-evidence matrix must be rectangular: {exc}") from None
    if m.ndim != 2:
        raise ValueError(f"log-evidence matrix must be 2-D, got shape {m.shape}")
    n, k = m.shape
    if n < 1 or k < 2:
        raise ValueError(f"need at least 1 subject and 2 models, got {n} x {k}")
    if not np.all(np.isfinite(m)):
        raise ValueError("log-evidence matrix contains non-finite entries")
    return m


def _psi(alpha):
    return np.array([_digamma(a) for a in alpha])


def vb_step(lme, alpha, alpha0):
    """One sweep of the VB update; returns the new alpha.

    Each row is shifted by its maximum before exponentiating.  The
    responsibilities ``u_ij / u_i`` do not change under per-row constants,
    so this is exact and avoids overflow for log evidences in the
    thousands.
    """
    lme = as_lme(lme)
    alpha = as_alpha(alpha)
    alpha0 = as_alpha(alpha0)
    if not alpha.size == alpha0.size == lme.shape[1]:
        raise ValueError("alpha, alpha0 and the number of models disagree")
    log_u = lme + (_psi(alpha) - _digamma(alpha.sum()))
    log_u -= log_u.max(axis=1, keepdims=True)
    u = np.exp(log_u)
    resp = u / u.sum(axis=1, keepdims=True)
    return alpha0 + resp.sum(axis=0)


def vb_estimate(lme, alpha0=None, tol=1e-6, max_iter=1000, quad_cfg=DEFAULT_CONFIG):
    """Iterate :func:`vb_step` from ``alpha0`` until ``max |delta alpha| < tol``.

    ``alpha0`` defaults to all ones.  Hitting ``max_iter`` is not an
    error: the last iterate is returned with ``converged=False``.
    """
    lme = as_lme(lme)
    m = lme.shape[1]
    alpha0 = np.ones(m) if alpha0 is None else as_alpha(alpha0)
    if alpha0.size != m:
        raise ValueError(f"alpha0 has {alpha0.size} entries for {m} models")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")

    alpha = alpha0.copy()
    converged = False
    it = 0
    while it < max_iter:
        new = vb_step(lme, alpha, alpha0)
        it += 1
        delta = np.max(np.abs(new - alpha))
        alpha = new
        if delta < tol:
            converged = True
            break
    return BmsResult(
        alpha_post=alpha,
        expected_freq=alpha / alpha.sum(),
        exceedance=ep_auto(alpha, quad_cfg),
        iterations=it,
        converged=converged,
    )


def family_ep(result, groups, quad_cfg=DEFAULT_CONFIG, base=0):
    """EPs of model families: agglomerate the posterior over ``groups``, then EP."""
    return ep_auto(agglomerate(result.alpha_post, groups, base), quad_cfg)
