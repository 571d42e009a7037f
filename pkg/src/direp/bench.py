"""Timing comparison of quadrature against Monte-Carlo EPs on synthetic posteriors."""

import time
from dataclasses import asdict, dataclass

import numpy as np

from .dirichlet import ep_batch, ep_integration, ep_sampling, sample_gamma, SamplingConfig
from .quadrature import DEFAULT_CONFIG

# perturbation mass per alpha vector, i.e. the number of pseudo-subjects
SUBJECTS = 22


@dataclass
class BenchReport:
    k: int
    batch_size: int
    integration_seconds: float
    sampling_seconds: float
    samples: int
    ratio: float
    max_abs_discrepancy: float

    def as_dict(self):
        return asdict(self)


def synthetic_alphas(k, batch, seed):
    """``batch`` alpha vectors ``1 + g`` with ``g_j ~ Gamma(1, SUBJECTS / k)``.

    Mimics VB posteriors from a flat prior plus ``SUBJECTS`` subjects'
    worth of responsibility mass spread unevenly over ``k`` models.
    """
    rng = np.random.default_rng(seed)
    return 1.0 + sample_gamma(1.0, rng, size=(batch, k)) * (SUBJECTS / k)


def run_benchmark(k, batch, samples=100_000, seed=0, quad_cfg=DEFAULT_CONFIG):
    """Time both EP methods on the same synthetic batch.

    Compiled kernels are warmed up first so that JIT time is not charged
    to either method.
    """
    if k < 3:
        raise ValueError("benchmark needs k >= 3; k = 2 has a closed form")
    if batch < 1 or samples < 1:
        raise ValueError("batch and samples must be positive")
    alphas = synthetic_alphas(k, batch, seed)

    ep_integration(alphas[0], quad_cfg)
    ep_sampling(alphas[0], SamplingConfig(100, 0))

    t0 = time.perf_counter()
    integrated = [ep_integration(a, quad_cfg) for a in alphas]
    t_int = time.perf_counter() - t0

    t0 = time.perf_counter()
    sampled = ep_batch(alphas, "sampling", samples=samples, seed=seed)
    t_smp = time.perf_counter() - t0

    discrepancy = max(float(np.max(np.abs(i.phi - s.phi))) for i, s in zip(integrated, sampled))
    return BenchReport(
        k=k,
        batch_size=batch,
        integration_seconds=t_int,
        sampling_seconds=t_smp,
        samples=samples,
        ratio=t_smp / t_int,
        max_abs_discrepancy=discrepancy,
    )
