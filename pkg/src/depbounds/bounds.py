"""Evaluators for the tail bounds, one per theorem-stated inequality.

Every evaluator takes the sum-scale threshold ``t`` (the event is
``sum >= t``, except the martingale and U-statistic families where ``t``
is per-variable, as in their statements) and returns a :class:`TailBound`
carrying the log-scale value, the optimizer parameters actually used and
a structured validity verdict.  Hypothesis violations are never warnings:
they produce ``Invalid`` with the violated clause named, and no value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .numkernel import (
    NEG_INF,
    BinomialSpec,
    _binom_pmf_log_vec,
    binom_pmf_log,
    kl_divergence,
    log_binom_coeff,
    log_gen_binom_coeff,
    to_prob,
)

__all__ = [
    "TailBound",
    "MeanOnly",
    "ProductBound",
    "SplitBound",
    "SymmetricMoments",
    "UStatParams",
    "DependencyGraphParams",
    "hoeffding_bound",
    "ik_bound",
    "linial_luria_bound",
    "linial_lower_bound",
    "expfunct_bound",
    "bincoupling_bound",
    "mcdiarmid_bound",
    "mcdiarmid_refined_bound",
    "kwise_bound",
    "kwise_bernoulli_bound",
    "sss_bound",
    "depgraph_bound",
    "ustat_bound",
    "ustat_refined_bound",
    "eps_to_t",
    "t_to_eps",
    "optimal_h_cross_check",
]


# ---------------------------------------------------------------------------
# result and profile types


@dataclass
class TailBound:
    method: str
    log_bound: float | None
    params: dict = field(default_factory=dict)
    invalid_reason: str | None = None

    @property
    def is_valid(self) -> bool:
        return self.invalid_reason is None

    @property
    def bound(self) -> float:
        """Linear-scale value, clamped into [0,1]."""
        if not self.is_valid:
            raise ValueError(f"invalid bound: {self.invalid_reason}")
        return to_prob(self.log_bound)

    def __repr__(self):
        if self.is_valid:
            return f"TailBound({self.method}, log_bound={self.log_bound:.6g})"
        return f"TailBound({self.method}, Invalid({self.invalid_reason!r}))"


def _invalid(method: str, reason: str) -> TailBound:
    return TailBound(method=method, log_bound=None, invalid_reason=reason)


def _clamp(log_value: float, params: dict) -> float:
    if log_value > 0.0:
        params["clamped"] = True
        return 0.0
    return log_value


@dataclass(frozen=True)
class MeanOnly:
    """Only the average mean p is known."""

    p: float


@dataclass(frozen=True)
class ProductBound:
    """E[prod_{i in A} X_i] <= gamma^|A| for every subset A."""

    gamma: float


@dataclass(frozen=True)
class SplitBound:
    """E[Z_A] <= gamma^|A| * delta^(n-|A|) for every subset A.

    Feasibility forces gamma + delta >= 1; infeasible pairs are rejected.
    """

    gamma: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0,1), got {self.gamma}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must be in (0,1], got {self.delta}")
        if self.gamma + self.delta < 1.0:
            raise ValueError(
                f"gamma + delta = {self.gamma + self.delta} < 1 is infeasible"
            )


@dataclass(frozen=True)
class SymmetricMoments:
    """Exact symmetric moments S_k = sum_{|A|=k} E[prod_{i in A} X_i]."""

    s: dict

    def __post_init__(self):
        if self.s.get(0, 1.0) != 1.0 and not math.isclose(self.s[0], 1.0):
            raise ValueError("S_0 must equal 1")


@dataclass(frozen=True)
class UStatParams:
    """Parameters of a U-statistic sum over d-subsets of n i.i.d. variables."""

    n: int
    d: int
    p: float

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError("n and d must be positive")
        if self.n % self.d != 0:
            raise ValueError(f"d={self.d} does not divide n={self.n}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0,1), got {self.p}")

    @property
    def k(self) -> int:
        return self.n // self.d

    @property
    def n_d(self) -> int:
        return math.comb(self.n - 1, self.d - 1)


@dataclass(frozen=True)
class DependencyGraphParams:
    n: int
    alpha: int

    def __post_init__(self):
        if not 1 <= self.alpha <= self.n:
            raise ValueError(
                f"independence number {self.alpha} outside [1, {self.n}]"
            )


# ---------------------------------------------------------------------------
# threshold conversions


def eps_to_t(n: int, base: float, eps: float) -> float:
    """Sum-scale threshold t = n*base*(1+eps)."""
    return n * base * (1.0 + eps)


def t_to_eps(n: int, base: float, t: float) -> float:
    return t / (n * base) - 1.0


# ---------------------------------------------------------------------------
# core evaluators


def _log_hoeffding(n: int, p: float, t: float) -> float:
    """ln H(n,p,t) via the product closed form."""
    return (
        t * math.log(p)
        + (n - t) * math.log1p(-p)
        + t * (math.log(n - t) - math.log(t))
        + n * (math.log(n) - math.log(n - t))
    )


def hoeffding_bound(n: int, p: float, t: float) -> TailBound:
    """Optimal exponential-moment bound for independent [0,1] summands.

    Returns ln H(n,p,t) = -n*D(t/n || p); valid for np < t < n.
    """
    method = "hoeffding"
    if not 0.0 < p < 1.0:
        return _invalid(method, "p outside (0,1)")
    if t <= n * p:
        return _invalid(method, "t <= np")
    if t >= n:
        return _invalid(method, "t >= n")
    q = t / n
    log_bound = -n * kl_divergence(q, p)
    h_opt = math.log(t * (1.0 - p)) - math.log((n - t) * p)
    params = {
        "h": h_opt,
        "eps": t_to_eps(n, p, t),
        "closed_form": _log_hoeffding(n, p, t),
        "provenance": "closed-form",
    }
    return TailBound(method, _clamp(log_bound, params), params)


def ik_bound(n: int, gamma: float, eps: float, c: float = 1.0) -> TailBound:
    """Covariance-condition bound c * exp(-n*D(gamma(1+eps)||gamma)).

    The default c=1 is sound only for Bernoulli 0/1 inputs; the general
    [0,1] constant is unknown, so the result is annotated accordingly
    unless the caller overrides c.
    """
    method = "ik"
    if not 0.0 < gamma < 1.0:
        return _invalid(method, "gamma outside (0,1)")
    if c < 1.0:
        return _invalid(method, "c < 1")
    if eps <= 0.0:
        return _invalid(method, "eps <= 0")
    if eps >= 1.0 / gamma - 1.0:
        return _invalid(method, "eps >= 1/gamma - 1")
    log_bound = math.log(c) - n * kl_divergence(gamma * (1.0 + eps), gamma)
    params = {
        "eps": eps,
        "c": c,
        "t": eps_to_t(n, gamma, eps),
        "soundness": "Bernoulli-only" if c == 1.0 else "general",
    }
    return TailBound(method, _clamp(log_bound, params), params)


def _profile_log_sk(profile, n: int, k: int) -> float | None:
    """ln S_k from a moment profile, or None if the profile cannot supply it."""
    if isinstance(profile, SymmetricMoments):
        if k not in profile.s:
            return None
        sk = profile.s[k]
        return math.log(sk) if sk > 0.0 else NEG_INF
    if isinstance(profile, ProductBound):
        return log_binom_coeff(n, k) + k * math.log(profile.gamma)
    if isinstance(profile, MeanOnly):
        if k == 1:
            return math.log(n * profile.p) if profile.p > 0 else NEG_INF
        return None
    return None


def linial_luria_bound(n: int, beta_n: int, k: int, profile) -> TailBound:
    """Symmetric-moment bound S_k / C(beta_n, k) for Bernoulli indicators."""
    method = "linial-luria"
    if not 0 < beta_n <= n:
        return _invalid(method, "beta_n outside (0, n]")
    if not 0 < k < beta_n:
        return _invalid(method, "k not in (0, beta_n)")
    log_sk = _profile_log_sk(profile, n, k)
    if log_sk is None:
        return _invalid(method, f"profile cannot supply S_{k}")
    if log_sk == NEG_INF:
        return TailBound(method, NEG_INF, {"k": k})
    params = {"k": k, "beta_n": beta_n}
    log_bound = log_sk - log_binom_coeff(beta_n, k)
    return TailBound(method, _clamp(log_bound, params), params)


def linial_lower_bound(n: int, beta_n: int, s_beta_n: float) -> float:
    """Certified lower bound ln(S_{beta_n} / C(n, beta_n)) for Bernoulli inputs."""
    if not 0 < beta_n <= n:
        raise ValueError(f"beta_n={beta_n} outside (0, {n}]")
    if s_beta_n < 0.0:
        raise ValueError(f"S_beta_n must be nonnegative, got {s_beta_n}")
    if s_beta_n == 0.0:
        return NEG_INF
    return min(0.0, math.log(s_beta_n) - log_binom_coeff(n, beta_n))


def expfunct_bound(n: int, gamma: float, delta: float, t: float) -> TailBound:
    """Product-split bound gamma^t delta^(n-t) ((n-t)/t)^t (n/(n-t))^n.

    Requires E[Z_A] <= gamma^|A| delta^(n-|A|) for all subsets A, which
    forces gamma + delta >= 1.  Params carry the KL-with-correction form,
    which the closed form never exceeds.
    """
    method = "expfunct"
    if not 0.0 < gamma < 1.0:
        return _invalid(method, "gamma outside (0,1)")
    if not 0.0 < delta <= 1.0:
        return _invalid(method, "delta outside (0,1]")
    if gamma + delta < 1.0:
        return _invalid(method, "gamma + delta < 1")
    if t <= n * gamma:
        return _invalid(method, "t <= n*gamma")
    if t >= n:
        return _invalid(method, "t >= n")
    eps = t_to_eps(n, gamma, t)
    log_closed = (
        t * math.log(gamma)
        + (n - t) * math.log(delta)
        + t * (math.log(n - t) - math.log(t))
        + n * (math.log(n) - math.log(n - t))
    )
    q = gamma * (1.0 + eps)
    log_kl_form = -n * (
        kl_divergence(q, gamma) - (1.0 - q) * (math.log(delta) - math.log1p(-gamma))
    )
    h_opt = math.log(t * delta) - math.log((n - t) * gamma)
    params = {
        "eps": eps,
        "h": h_opt,
        "kl_form": min(0.0, log_kl_form),
    }
    return TailBound(method, _clamp(log_closed, params), params)


def bincoupling_bound(n: int, p: float, t: float) -> TailBound:
    """Factor-2 coupling bound 2*exp(-n*D(p(1+eps0)||p)) with t-1 = np(1+eps0).

    The coupling argument inherits the covariance condition at rate p, so
    soundness requires E[prod_{i in A} X_i] <= p^|A|.
    """
    method = "bincoupling"
    if not 0.0 < p < 1.0:
        return _invalid(method, "p outside (0,1)")
    if t <= n * p + 1.0:
        return _invalid(method, "t <= np+1")
    if t >= n:
        return _invalid(method, "t >= n")
    eps0 = (t - 1.0 - n * p) / (n * p)
    q = p * (1.0 + eps0)
    if q >= 1.0:
        return _invalid(method, "t-1 >= n")
    log_bound = math.log(2.0) - n * kl_divergence(q, p)
    params = {"eps0": eps0}
    return TailBound(method, _clamp(log_bound, params), params)


def mcdiarmid_bound(n: int, p: float, t: float) -> TailBound:
    """Martingale-difference bound H_m(n,p,t) = exp(-n*D(p+t||p)).

    Here t is per-variable: the event is sum(Y_i) >= n*t with
    -p_i <= Y_i <= 1-p_i and p the average of the p_i.
    """
    method = "mcdiarmid"
    if not 0.0 < p < 1.0:
        return _invalid(method, "p outside (0,1)")
    if t <= 0.0:
        return _invalid(method, "t <= 0")
    if t >= 1.0 - p:
        return _invalid(method, "t >= 1-p")
    log_bound = -n * kl_divergence(p + t, p)
    params = {"foolproof": -2.0 * n * t * t}
    return TailBound(method, _clamp(log_bound, params), params)


def _mds_h_threshold(p: float) -> float:
    """Lower t-threshold below which the optimal h drops to <= 1."""
    return p * (1.0 - p) * (math.e - 1.0) / (1.0 - p + math.e * p)


def mcdiarmid_refined_bound(n: int, p: float, t: float) -> TailBound:
    """Missing-factor refinement of the martingale-difference bound.

    Valid when n(p+t) is a positive integer and t is large enough that the
    optimal exponential tilt h exceeds 1.  Always at most the plain bound.
    """
    method = "mcdiarmid-refined"
    if not 0.0 < p < 1.0:
        return _invalid(method, "p outside (0,1)")
    if t >= 1.0 - p:
        return _invalid(method, "t >= 1-p")
    if t <= 0.0:
        return _invalid(method, "t <= 0")
    ell_real = n * (p + t)
    ell = round(ell_real)
    if abs(ell_real - ell) > 1e-9 or ell < 1:
        return _invalid(method, "n(p+t) not a positive integer")
    if ell <= n * p or ell >= n:
        return _invalid(method, "n(p+t) outside (np, n)")
    if t <= _mds_h_threshold(p):
        return _invalid(method, "t too small: h <= 1")
    h = math.log((t + p) * (1.0 - p)) - math.log(p * (1.0 - p - t))
    missing = (1.0 + h) / math.exp(h)
    pmf = _binom_pmf_log_vec(n, p)
    j = np.arange(n + 1)
    # H_m - T telescopes to the upper part of the tilted sum, so no
    # subtraction of close quantities is ever performed
    log_hm_minus_t = float(logsumexp(pmf[ell:] + h * (j[ell:] - ell)))
    log_at_ell = float(pmf[ell])
    log_bound = float(
        logsumexp(
            [math.log(missing) + log_hm_minus_t,
             math.log1p(-missing) + log_at_ell]
        )
    )
    params = {
        "h": h,
        "missing_factor": missing,
        "ell": ell,
        "log_hm": -n * kl_divergence(p + t, p),
    }
    return TailBound(method, _clamp(log_bound, params), params)


def kwise_bound(n: int, k: int, p: float, eps: float) -> TailBound:
    """k-wise independence bound (p-p^2)^(k-n) * exp(-n*D(p(1+eps)||p))."""
    method = "kwise"
    if not 1 <= k <= n:
        return _invalid(method, "k outside [1, n]")
    if not 0.0 < p < 1.0:
        return _invalid(method, "p outside (0,1)")
    if eps <= 0.0:
        return _invalid(method, "eps <= 0")
    if eps >= 1.0 / p - 1.0:
        return _invalid(method, "eps >= 1/p - 1")
    log_bound = -(n - k) * math.log(p * (1.0 - p)) - n * kl_divergence(
        p * (1.0 + eps), p
    )
    params = {"eps": eps, "t": eps_to_t(n, p, eps)}
    return TailBound(method, _clamp(log_bound, params), params)


def kwise_bernoulli_bound(n: int, k: int, p: float, eps: float) -> TailBound:
    """Bernoulli k-wise bound C(n,k) p^k / C(np(1+eps), k), integer threshold."""
    method = "kwise-bernoulli"
    if not 1 <= k <= n:
        return _invalid(method, "k outside [1, n]")
    if not 0.0 < p < 1.0:
        return _invalid(method, "p outside (0,1)")
    if eps <= 0.0:
        return _invalid(method, "eps <= 0")
    m_real = n * p * (1.0 + eps)
    m = round(m_real)
    if abs(m_real - m) > 1e-9 or m < 1:
        return _invalid(method, "np(1+eps) not a positive integer")
    if m <= k:
        return _invalid(method, "np(1+eps) <= k")
    if m > n:
        return _invalid(method, "np(1+eps) > n")
    log_bound = (
        log_binom_coeff(n, k) + k * math.log(p) - log_binom_coeff(m, k)
    )
    params = {"threshold": m, "k": k}
    return TailBound(method, _clamp(log_bound, params), params)


def sss_bound(n: int, p: float, eps: float, k: int) -> TailBound:
    """Schmidt-Siegel-Srinivasan bound C(n,k*) p^k* / C(np(1+eps), k*).

    k* = ceil(np*eps/(1-p)); requires k-wise independence with k >= k*.
    The top binomial-coefficient argument may be non-integer and is
    evaluated through the log-gamma extension.
    """
    method = "sss"
    if not 0.0 < p < 1.0:
        return _invalid(method, "p outside (0,1)")
    if eps <= 0.0:
        return _invalid(method, "eps <= 0")
    if eps >= 1.0 / p - 1.0:
        return _invalid(method, "eps >= 1/p - 1")
    k_star = math.ceil(n * p * eps / (1.0 - p) - 1e-12)
    if k < k_star:
        return _invalid(method, f"k < k* = {k_star}")
    if k_star < 1:
        return _invalid(method, "k* < 1 (eps too small)")
    m = n * p * (1.0 + eps)
    log_bound = (
        log_binom_coeff(n, k_star)
        + k_star * math.log(p)
        - log_gen_binom_coeff(m, k_star)
    )
    params = {"k_star": k_star, "threshold": m}
    return TailBound(method, _clamp(log_bound, params), params)


def depgraph_bound(params: DependencyGraphParams, t: float) -> TailBound:
    """Dependency-graph bound 2^(n-alpha) * H(n, 1/2, t)."""
    method = "depgraph"
    n, alpha = params.n, params.alpha
    if t <= n / 2.0:
        return _invalid(method, "t <= n/2")
    if t >= n:
        return _invalid(method, "t >= n")
    log_bound = (n - alpha) * math.log(2.0) - n * kl_divergence(t / n, 0.5)
    out = {"alpha": alpha}
    return TailBound(method, _clamp(log_bound, out), out)


def ustat_bound(params: UStatParams, t: float) -> TailBound:
    """Hoeffding's U-statistic bound exp(-k*D(p+t||p)) at y = E[X] + t*C(n,d)."""
    method = "ustat"
    k, p, n_d = params.k, params.p, params.n_d
    if t <= 0.0:
        return _invalid(method, "t <= 0")
    if t >= 1.0 - p:
        return _invalid(method, "t >= 1-p")
    log_bound = -k * kl_divergence(p + t, p)
    y = k * n_d * (p + t)
    out = {
        "y": y,
        "N_d": n_d,
        "k": k,
        "foolproof": -2.0 * k * t * t,
    }
    return TailBound(method, _clamp(log_bound, out), out)


def ustat_refined_bound(params: UStatParams, t: float) -> TailBound:
    """Missing-factor refinement of the U-statistic bound.

    Strictly below exp(-2kt^2) on its validity domain; requires k(p+t) a
    positive integer in (kp, k) and t above the h*N_d > 1 threshold.
    """
    method = "ustat-refined"
    k, p, n_d = params.k, params.p, params.n_d
    if t <= 0.0:
        return _invalid(method, "t <= 0")
    if t >= 1.0 - p:
        return _invalid(method, "t >= 1-p")
    ell_real = k * (p + t)
    ell = round(ell_real)
    if abs(ell_real - ell) > 1e-9 or ell < 1:
        return _invalid(method, "k(p+t) not a positive integer")
    if ell <= k * p or ell >= k:
        return _invalid(method, "k(p+t) outside (kp, k)")
    if t <= _mds_h_threshold(p):
        return _invalid(method, "t too small: h*N_d <= 1")
    h_nd = math.log((p + t) * (1.0 - p)) - math.log(p * (1.0 - p - t))
    h = h_nd / n_d
    missing = (h_nd + 1.0) / math.exp(h_nd)
    y = k * n_d * (p + t)
    pmf = _binom_pmf_log_vec(k, p)
    j = np.arange(k + 1)
    foolproof = math.exp(-2.0 * k * t * t)
    if ell >= 1:
        t2 = float(np.exp(logsumexp(pmf[:ell] + h * (n_d * j[:ell] - y))))
    else:
        t2 = 0.0
    value = missing * (foolproof - t2) + (1.0 - missing) * math.exp(pmf[ell])
    if value <= 0.0:
        log_bound = NEG_INF
    else:
        log_bound = math.log(value)
    out = {
        "h": h,
        "h_N_d": h_nd,
        "missing_factor": missing,
        "y": y,
        "N_d": n_d,
        "k": k,
        "T2": t2,
        "foolproof": -2.0 * k * t * t,
    }
    return TailBound(method, _clamp(log_bound, out), out)


# ---------------------------------------------------------------------------
# numeric cross-check of the closed-form optimizers


def optimal_h_cross_check(log_objective, h_lo: float = 1e-9,
                          h_hi: float = 50.0) -> tuple[float, float]:
    """Minimize a log-scale objective over h > 0 by bracketed scalar search.

    Guards the closed-form tilts against transcription errors; returns
    (h_min, objective(h_min)).
    """
    res = minimize_scalar(
        log_objective, bounds=(h_lo, h_hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x), float(res.fun)
