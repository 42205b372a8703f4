"""Numerically stable log-space primitives.

Everything probability-valued in this package lives on the natural-log
scale: a "log-prob" is a float <= 0, with ``-inf`` standing for probability
zero.  Conversion back to linear scale clamps into [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

NEG_INF = float("-inf")

__all__ = [
    "NEG_INF",
    "BinomialSpec",
    "PoissonBinomialSpec",
    "kl_divergence",
    "log_binom_coeff",
    "binom_pmf_log",
    "binom_tail_log",
    "poisson_binom_dist",
    "binomial_median_lb_check",
    "to_prob",
]


def to_prob(log_value: float) -> float:
    """exp of a log-prob, clamped into [0, 1]."""
    if log_value == NEG_INF:
        return 0.0
    return min(1.0, math.exp(min(log_value, 0.0)))


@dataclass(frozen=True)
class BinomialSpec:
    """Binomial trial count n >= 1 and success probability p in (0,1)."""

    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0,1), got {self.p}")


@dataclass(frozen=True)
class PoissonBinomialSpec:
    """Per-trial success probabilities, each in [0,1]."""

    ps: tuple

    def __post_init__(self):
        ps = tuple(float(p) for p in self.ps)
        object.__setattr__(self, "ps", ps)
        if len(ps) < 1:
            raise ValueError("need at least one trial probability")
        for p in ps:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"trial probability {p} outside [0,1]")

    @property
    def n(self) -> int:
        return len(self.ps)

    @property
    def mean(self) -> float:
        return math.fsum(self.ps) / len(self.ps)


def kl_divergence(q: float, p: float) -> float:
    """Kullback-Leibler divergence D(q||p) for q, p strictly inside (0,1).

    Endpoints are rejected rather than extended by continuity; callers
    that rely on the 0*log(0) convention must handle it themselves.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be strictly inside (0,1), got {q}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be strictly inside (0,1), got {p}")
    # log1p keeps the (1-q)/(1-p) term accurate near the upper endpoint
    value = q * (math.log(q) - math.log(p)) + (1.0 - q) * (
        math.log1p(-q) - math.log1p(-p)
    )
    return max(value, 0.0)


def log_binom_coeff(n: int, k: int) -> float:
    """ln C(n,k) via log-gamma; 0 <= k <= n."""
    if k < 0 or n < 0:
        raise ValueError(f"n and k must be nonnegative, got n={n}, k={k}")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_gen_binom_coeff(x: float, k: int) -> float:
    """ln of the generalized binomial coefficient C(x,k) = x!/(k!(x-k)!).

    Extended by log-gamma to real x > k - 1.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if x <= k - 1:
        raise ValueError(f"top argument {x} must exceed k-1={k - 1}")
    return float(gammaln(x + 1) - gammaln(k + 1) - gammaln(x - k + 1))


def binom_pmf_log(spec: BinomialSpec, j: int) -> float:
    """ln P[Bin(n,p) = j]."""
    n, p = spec.n, spec.p
    if j < 0 or j > n:
        raise ValueError(f"j={j} outside {{0,...,{n}}}")
    return (
        log_binom_coeff(n, j) + j * math.log(p) + (n - j) * math.log1p(-p)
    )


def _binom_pmf_log_vec(n: int, p: float) -> np.ndarray:
    j = np.arange(n + 1)
    return (
        gammaln(n + 1)
        - gammaln(j + 1)
        - gammaln(n - j + 1)
        + j * math.log(p)
        + (n - j) * math.log1p(-p)
    )


def binom_tail_log(spec: BinomialSpec, j: int) -> float:
    """ln P[Bin(n,p) >= j] by direct log-sum-exp over the upper terms.

    Never computed as 1 - cdf, so deep tails keep full relative accuracy.
    """
    n = spec.n
    if j < 0 or j > n:
        raise ValueError(f"j={j} outside {{0,...,{n}}}")
    if j == 0:
        return 0.0
    terms = _binom_pmf_log_vec(n, spec.p)[j:]
    return min(0.0, float(logsumexp(terms)))


def poisson_binom_dist(spec: PoissonBinomialSpec) -> np.ndarray:
    """Exact pmf of the number of successes in independent non-identical trials.

    Dynamic-programming convolution in linear scale; the only linear-scale
    computation in the package (log-space convolution buys nothing at
    these sizes).
    """
    probs = np.array([1.0])
    for p in spec.ps:
        nxt = np.zeros(len(probs) + 1)
        nxt[:-1] = probs * (1.0 - p)
        nxt[1:] += probs * p
        probs = nxt
    return probs


def binomial_median_lb_check(spec: BinomialSpec) -> bool:
    """True iff P[Bin(n,p) >= np - 1] >= 1/2, from the exact distribution."""
    n, p = spec.n, spec.p
    j0 = max(0, math.ceil(n * p - 1.0 - 1e-12))
    return to_prob(binom_tail_log(spec, j0)) >= 0.5 - 1e-12
