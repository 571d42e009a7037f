"""Exceedance probabilities and related operations for the Dirichlet distribution.

The exceedance probability of category ``j`` is the probability that ``r_j``
is the largest component of ``r ~ Dir(alpha)``.  Writing ``r`` as
normalized independent Gamma(alpha_i, 1) variates ``q_i``, ``r_j`` is the
largest exactly when ``q_j`` is, so

    phi_j = int_0^inf  prod_{i != j} P(alpha_i, q) * Gamma(q; alpha_j, 1)  dq

with ``P`` the regularized lower incomplete gamma function.  For ``k = 2``
this collapses to ``1 - I_{1/2}(alpha_1, alpha_2)``.

Category indices are 0-based throughout this module.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConvergenceError, DomainError, ModeUndefinedError, PartitionError
from .quadrature import DEFAULT_CONFIG, integrate, integrate_semi_infinite
from .special import _ln_gamma, _reg_lower_inc_gamma, reg_inc_beta

CLOSED_FORM = "closed_form"
INTEGRATION = "integration"
SAMPLING = "sampling"

_CHUNK = 100_000
_MAX_RESAMPLE = 100


@dataclass
class ExceedanceVector:
    """EPs ``phi`` plus per-entry error diagnostics.

    ``error`` holds the quadrature error estimate for integration results
    and the binomial standard error for sampling results (zeros for the
    closed form).
    """

    phi: np.ndarray
    method: str
    error: np.ndarray = None
    counts: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if self.error is None:
            self.error = np.zeros_like(self.phi)
        else:
            self.error = np.asarray(self.error, dtype=float)

    def __array__(self, dtype=None, copy=None):
        return self.phi if dtype is None else self.phi.astype(dtype)

    def __len__(self):
        return self.phi.size

    @property
    def sum_deviation(self):
        """``sum(phi) - 1``; the accuracy certificate for integration results."""
        return math.fsum(self.phi) - 1.0


@dataclass(frozen=True)
class SamplingConfig:
    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def as_alpha(alpha):
    """Validate a concentration vector and return it as a float array."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.ndim != 1 or a.size < 1:
        raise DomainError("alpha must be a non-empty 1-D vector")
    if not np.all(np.isfinite(a) & (a > 0)):
        raise DomainError(f"alpha components must be positive and finite, got {a.tolist()}")
    return a


# -- closed form ---------------------------------------------------------------

def ep_bivariate(alpha):
    """EPs for ``k = 2`` from the Beta CDF at 1/2."""
    a = as_alpha(alpha)
    if a.size != 2:
        raise ValueError(f"ep_bivariate needs exactly 2 categories, got {a.size}")
    phi1 = 1.0 - reg_inc_beta(0.5, a[0], a[1])
    return ExceedanceVector(np.array([phi1, 1.0 - phi1]), CLOSED_FORM)


# -- numerical integration -----------------------------------------------------

@njit(cache=True)
def _ep_integrand(q, alpha_j, others):
    out = np.empty(q.size)
    log_norm = _ln_gamma(alpha_j)
    for n in range(q.size):
        x = q[n]
        if not x < np.inf:
            out[n] = 0.0
            continue
        p = 1.0
        for a in others:
            p *= _reg_lower_inc_gamma(a, x)
            if p == 0.0:
                break
        if p == 0.0:
            out[n] = 0.0
        elif x <= 0.0:
            # density of Gamma(alpha_j, 1) at the origin
            out[n] = np.inf if alpha_j < 1.0 else (1.0 if alpha_j == 1.0 else 0.0)
        else:
            out[n] = p * math.exp((alpha_j - 1.0) * math.log(x) - x - log_norm)
    return out


def ep_integrand(q, alpha_j, alpha_others):
    """Integrand of the EP integral for one category.

    ``prod_i P(alpha_others[i], q)`` times the Gamma(alpha_j, 1) density at
    ``q``.  The density is assembled in log space, so large shapes neither
    overflow nor underflow prematurely.  Accepts scalar or array ``q``.
    """
    others = np.asarray(alpha_others, dtype=float).reshape(-1)
    if not (alpha_j > 0 and np.all(others > 0)):
        raise DomainError("shape parameters must be positive")
    qa = np.asarray(q, dtype=float)
    if np.any(qa < 0):
        raise DomainError("q must be nonnegative")
    out = _ep_integrand(qa.reshape(-1), float(alpha_j), others)
    return out.reshape(qa.shape) if qa.ndim else float(out[0])


def ep_integration(alpha, cfg=DEFAULT_CONFIG):
    """EPs by one-dimensional quadrature, one integral per category.

    Each integral is split at ``alpha_j`` (near the bulk of the Gamma
    density) into a finite part and a semi-infinite tail.  The result is
    not renormalized; inspect ``sum_deviation``.

    Raises
    ------
    ConvergenceError
        If quadrature fails for some category; the message names it and the
        ``component`` attribute holds its 0-based index.
    """
    a = as_alpha(alpha)
    if a.size < 2:
        raise ValueError("ep_integration needs at least 2 categories")
    phi = np.empty(a.size)
    err = np.empty(a.size)
    for j in range(a.size):
        aj = a[j]
        others = np.delete(a, j)

        def f(x, aj=aj, others=others):
            return _ep_integrand(x, aj, others)

        try:
            v1, e1 = integrate(f, 0.0, aj, cfg)
            v2, e2 = integrate_semi_infinite(f, aj, cfg)
        except ConvergenceError as exc:
            wrapped = ConvergenceError(f"category {j}: {exc}", exc.estimate, exc.error)
            wrapped.component = j
            raise wrapped from exc
        phi[j] = v1 + v2
        err[j] = e1 + e2
    return ExceedanceVector(phi, INTEGRATION, err)


# -- sampling ------------------------------------------------------------------

def _marsaglia_tsang(d, c, rng):
    # one proposal per entry; returns (values, accepted mask)
    x = rng.standard_normal(d.size)
    u = rng.random(d.size)
    v = 1.0 + c * x
    v *= v * v
    x *= x
    accept = u < 1.0 - 0.0331 * x * x
    slow = np.flatnonzero(~accept & (v > 0))
    if slow.size:
        vs = v[slow]
        with np.errstate(divide="ignore"):
            accept[slow] = np.log(u[slow]) < 0.5 * x[slow] + d[slow] * (1.0 - vs + np.log(vs))
    accept &= v > 0
    return d * v, accept


def sample_gamma(shape, rng, size=None):
    """Draw Gamma(shape, 1) variates.

    Marsaglia-Tsang squeeze/rejection for shape >= 1; for shape < 1 a
    Gamma(shape + 1) draw is scaled by ``U ** (1 / shape)``.  Vectorized:
    ``shape`` broadcasts against ``size``.  Deterministic given ``rng``.
    """
    shape = np.asarray(shape, dtype=float)
    if not np.all(shape > 0):
        raise DomainError("gamma shape must be positive")
    out_shape = shape.shape if size is None else size
    a = np.broadcast_to(shape, out_shape).ravel()
    boost = a < 1.0
    d = np.where(boost, a + 1.0, a) - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)

    out, accept = _marsaglia_tsang(d, c, rng)
    pending = np.flatnonzero(~accept)
    while pending.size:
        draw, accept = _marsaglia_tsang(d[pending], c[pending], rng)
        out[pending[accept]] = draw[accept]
        pending = pending[~accept]

    if boost.any():
        out[boost] *= rng.random(int(boost.sum())) ** (1.0 / a[boost])
    if size is None and shape.ndim == 0:
        return float(out[0])
    return out.reshape(out_shape)


def sample_dirichlet(alpha, rng, size=None):
    """Draw from ``Dir(alpha)`` by normalizing independent gamma variates.

    Returns shape ``(k,)`` for ``size=None``, else ``(size, k)``.  Rows whose
    gamma draws all underflow to 0 are redrawn.
    """
    a = as_alpha(alpha)
    n = 1 if size is None else int(size)
    q = sample_gamma(a, rng, size=(n, a.size))
    total = q.sum(axis=1)
    for _ in range(_MAX_RESAMPLE):
        bad = np.flatnonzero(total == 0)
        if not bad.size:
            break
        q[bad] = sample_gamma(a, rng, size=(bad.size, a.size))
        total[bad] = q[bad].sum(axis=1)
    else:
        raise ConvergenceError("gamma draws underflowed to zero repeatedly; alpha too small")
    r = q / total[:, None]
    return r[0] if size is None else r


def ep_sampling(alpha, cfg=SamplingConfig(), rng=None):
    """Monte-Carlo EPs: the fraction of Dirichlet draws in which each category is largest.

    Ties (a floating-point accident only) go to the lowest index.  The
    generator is ``np.random.default_rng(cfg.seed)`` unless ``rng`` is given.
    """
    a = as_alpha(alpha)
    if a.size < 2:
        raise ValueError("ep_sampling needs at least 2 categories")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    counts = np.zeros(a.size, dtype=np.int64)
    remaining = cfg.samples
    while remaining:
        n = min(_CHUNK, remaining)
        r = sample_dirichlet(a, rng, size=n)
        counts += np.bincount(np.argmax(r, axis=1), minlength=a.size)
        remaining -= n
    phi = counts / cfg.samples
    se = np.sqrt(phi * (1.0 - phi) / cfg.samples)
    return ExceedanceVector(phi, SAMPLING, se, counts)


def ep_auto(alpha, cfg=DEFAULT_CONFIG):
    """Closed form for ``k <= 2``, quadrature otherwise."""
    a = as_alpha(alpha)
    if a.size == 1:
        return ExceedanceVector(np.ones(1), CLOSED_FORM)
    if a.size == 2:
        return ep_bivariate(a)
    return ep_integration(a, cfg)


def task_seeds(seed, n):
    """Independent per-task seeds derived from a master seed and the task index."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def ep_batch(rows, method="auto", quad_cfg=DEFAULT_CONFIG, samples=1_000_000, seed=None):
    """EPs for many alpha vectors (rows may differ in length).

    For sampling, row ``i`` uses its own seed from :func:`task_seeds`, so a
    row's result does not depend on which other rows are in the batch or
    on evaluation order.
    """
    rows = [as_alpha(r) for r in rows]
    if method == "sampling":
        if seed is None:
            raise ValueError("sampling needs a seed")
        seeds = task_seeds(seed, len(rows))
        return [ep_sampling(r, SamplingConfig(samples, s)) for r, s in zip(rows, seeds)]
    if method == "integration":
        return [ep_integration(r, quad_cfg) for r in rows]
    if method == "auto":
        return [ep_auto(r, quad_cfg) for r in rows]
    raise ValueError(f"unknown method {method!r}")


# -- agglomeration and posteriors ----------------------------------------------

def validate_partition(groups, k, base=0):
    """Check that ``groups`` partitions ``{base, ..., base + k - 1}``.

    Returns the groups as lists of 0-based indices.  Raises
    :class:`PartitionError` naming empty groups and out-of-range,
    duplicated or missing indices (reported in the caller's ``base``).
    """
    groups = [list(g) for g in groups]
    problems = []
    if not groups:
        problems.append("no groups given")
    empty = [n + 1 for n, g in enumerate(groups) if not g]
    if empty:
        problems.append(f"empty groups at positions {empty}")
    flat = [int(i) for g in groups for i in g]
    valid = range(base, base + k)
    out_of_range = sorted({i for i in flat if i not in valid})
    if out_of_range:
        problems.append(f"indices out of range {base}..{base + k - 1}: {out_of_range}")
    seen, dup = set(), set()
    for i in flat:
        (dup if i in seen else seen).add(i)
    if dup:
        problems.append(f"duplicated indices: {sorted(dup)}")
    missing = sorted(set(valid) - seen)
    if missing:
        problems.append(f"missing indices: {missing}")
    if problems:
        raise PartitionError("invalid partition: " + "; ".join(problems))
    return [[int(i) - base for i in g] for g in groups]


def agglomerate(alpha, groups, base=0):
    """Concentrations of the grouped Dirichlet: one summed alpha per group."""
    a = as_alpha(alpha)
    groups = validate_partition(groups, a.size, base)
    return np.array([a[g].sum() for g in groups])


def _round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def posterior_from_counts(alpha0, counts, round_result=False):
    """Multinomial-Dirichlet update ``alpha0 + counts``.

    ``counts`` may be fractional (e.g. poll percentages times sample
    size).  With ``round_result`` the posterior is rounded half away from
    zero to whole numbers.
    """
    a0 = as_alpha(alpha0)
    n = np.asarray(counts, dtype=float).reshape(-1)
    if n.size != a0.size:
        raise ValueError(f"counts has {n.size} entries, alpha0 has {a0.size}")
    if not np.all(np.isfinite(n) & (n >= 0)):
        raise DomainError("counts must be finite and nonnegative")
    post = a0 + n
    if round_result:
        post = _round_half_away(post)
        if np.any(post <= 0):
            raise DomainError("rounding produced a nonpositive concentration")
    return post


def poll_posterior(percent, n, prior=None, round_result=False):
    """Posterior alpha from poll percentages: ``prior + percent / 100 * n``."""
    p = np.asarray(percent, dtype=float).reshape(-1)
    if not np.all(np.isfinite(p) & (p >= 0)):
        raise DomainError("percentages must be finite and nonnegative")
    if n < 0:
        raise DomainError("number of respondents must be nonnegative")
    prior = np.ones(p.size) if prior is None else prior
    return posterior_from_counts(prior, p / 100.0 * n, round_result)


def dirichlet_mode(alpha):
    """Mode ``(alpha_j - 1) / (alpha_s - k)``; needs every ``alpha_j > 1``."""
    a = as_alpha(alpha)
    if np.any(a <= 1):
        raise ModeUndefinedError(
            f"interior mode needs all alpha > 1; offending indices {np.flatnonzero(a <= 1).tolist()}")
    return (a - 1.0) / (a.sum() - a.size)


def threshold_probability(alpha, j, t):
    """``P(r_j > t)`` from the Beta(alpha_j, alpha_s - alpha_j) marginal."""
    a = as_alpha(alpha)
    if a.size < 2:
        raise ValueError("threshold_probability needs at least 2 categories")
    if not 0 <= j < a.size:
        raise IndexError(f"category index {j} out of range for k = {a.size}")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"threshold must lie in [0, 1], got {t}")
    return 1.0 - reg_inc_beta(t, a[j], a.sum() - a[j])
