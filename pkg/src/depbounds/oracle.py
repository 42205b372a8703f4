"""Exact small-instance machinery: explicit joint distributions, the
subset-weight decomposition of a sum of [0,1] variables, the induced
distribution on {0,...,n}, convex-function tail bounds, symmetric moments
and convex-ordering checks.

Everything here is a ground-truth oracle: sizes are capped (2^n
enumeration at n <= 20) and computations are exact up to float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .numkernel import (
    NEG_INF,
    PoissonBinomialSpec,
    log_binom_coeff,
    poisson_binom_dist,
)
from .bounds import ProductBound, SplitBound, TailBound, _clamp, _invalid

MAX_ENUM_N = 20

__all__ = [
    "JointDist",
    "ZDist",
    "ExponentialFamily",
    "HingeFamily",
    "BinomCoeffFamily",
    "default_h_grid",
    "zeta_decomposition",
    "z_distribution",
    "exact_tail",
    "dephoeff_bound",
    "symmetric_moment",
    "convex_order_check",
    "poisson_trials_check",
    "random_joint_dist",
    "subset_product_moments",
    "subset_zeta_moments",
    "GenerationError",
]


class GenerationError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


# ---------------------------------------------------------------------------
# joint distributions


@dataclass
class JointDist:
    """Finite joint distribution of n dependent [0,1]-valued variables.

    ``xs`` is an (m, n) array of support points, ``ws`` the matching
    probability weights (summing to 1 within 1e-12).
    """

    n: int
    xs: np.ndarray
    ws: np.ndarray

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ws = np.asarray(self.ws, dtype=float)
        if self.xs.ndim != 2 or self.xs.shape[1] != self.n:
            raise ValueError(f"support must be (m, {self.n}), got {self.xs.shape}")
        if self.ws.shape != (self.xs.shape[0],):
            raise ValueError("one weight per atom required")
        if np.any(self.xs < 0.0) or np.any(self.xs > 1.0):
            raise ValueError("coordinates must lie in [0,1]")
        if np.any(self.ws < 0.0):
            raise ValueError("weights must be nonnegative")
        total = math.fsum(self.ws)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")

    @property
    def is_bernoulli(self) -> bool:
        return bool(np.all((self.xs == 0.0) | (self.xs == 1.0)))

    def means(self) -> np.ndarray:
        return self.ws @ self.xs

    @property
    def mean_rate(self) -> float:
        """Average coordinate mean p = (1/n) sum E[X_i]."""
        return float(self.means().mean())

    # -- text serialization: one atom per line, "w x_1 ... x_n" ----------

    def dumps(self) -> str:
        lines = []
        for w, x in zip(self.ws, self.xs):
            lines.append(" ".join([repr(float(w))] + [repr(float(v)) for v in x]))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "JointDist":
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.split()])
        if not rows:
            raise ValueError("empty joint-distribution file")
        arr = np.array(rows, dtype=float)
        ws, xs = arr[:, 0], arr[:, 1:]
        total = math.fsum(ws)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total}, outside tolerance")
        return cls(n=xs.shape[1], xs=xs, ws=ws / total)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "JointDist":
        with open(path) as fh:
            return cls.loads(fh.read())


@dataclass
class ZDist:
    """Distribution on {0,...,n} induced by the subset-weight decomposition."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if np.any(self.probs < -1e-15):
            raise ValueError("negative probability")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @property
    def n(self) -> int:
        return len(self.probs) - 1

    def mean(self) -> float:
        return float(np.arange(self.n + 1) @ self.probs)


# ---------------------------------------------------------------------------
# decomposition and induced distribution


def zeta_decomposition(x) -> np.ndarray:
    """Subset weights prod_{i in A} x_i * prod_{i not in A} (1-x_i).

    Returns an array of length 2^n indexed by bitmask (bit i set means
    i in A).  The weights sum to 1 and their size-weighted sums recover
    sum(x); both identities hold by construction.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n > MAX_ENUM_N:
        raise ValueError(f"n={n} exceeds the 2^n enumeration cap {MAX_ENUM_N}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("coordinates must lie in [0,1]")
    zeta = np.array([1.0])
    for xi in x:
        zeta = np.concatenate([zeta * (1.0 - xi), zeta * xi])
    return zeta


def z_distribution(dist: JointDist) -> ZDist:
    """Law of Z on {0,...,n}: P[Z=j] = sum over |A|=j of E[zeta_A].

    The size-j subset sums of the zeta weights of a point x are exactly
    the Poisson-binomial pmf of the coordinates of x, so each atom
    contributes one DP convolution rather than a 2^n enumeration.
    """
    if dist.n > MAX_ENUM_N:
        raise ValueError(f"n={dist.n} exceeds cap {MAX_ENUM_N}")
    probs = np.zeros(dist.n + 1)
    for w, x in zip(dist.ws, dist.xs):
        probs += w * poisson_binom_dist(PoissonBinomialSpec(tuple(x)))
    return ZDist(probs)


def exact_tail(dist: JointDist, t: float) -> float:
    """Ground truth P[sum X_i >= t] by direct enumeration of the support."""
    sums = dist.xs.sum(axis=1)
    return float(dist.ws[sums >= t - 1e-12].sum())


# ---------------------------------------------------------------------------
# convex function families


def default_h_grid(center: float, span: float = 8.0, size: int = 512) -> np.ndarray:
    """Geometric grid of tilts around (and containing) a closed-form optimizer."""
    center = max(center, 1e-9)
    grid = center * np.geomspace(1.0 / span, span, size)
    # an odd-size geomspace would hit the center only up to rounding;
    # include it exactly so closed-form optima are reproduced
    return np.sort(np.append(grid, center))


@dataclass(frozen=True)
class ExponentialFamily:
    """f(x) = exp(h*x), h over a grid."""

    h_grid: np.ndarray

    def log_values(self, zdist: ZDist, t: float):
        j = np.arange(zdist.n + 1)
        with np.errstate(divide="ignore"):
            logp = np.where(zdist.probs > 0.0, np.log(zdist.probs), NEG_INF)
        vals = []
        for h in self.h_grid:
            vals.append(float(logsumexp(logp + h * j)) - h * t)
        return np.array(vals), [{"h": float(h)} for h in self.h_grid]


@dataclass(frozen=True)
class HingeFamily:
    """f(x) = max(0, h*(x - ell) + 1), h over a grid.

    Members with f(t) <= 0 are not valid bound witnesses and are skipped.
    """

    ell: float
    h_grid: np.ndarray

    def log_values(self, zdist: ZDist, t: float):
        j = np.arange(zdist.n + 1)
        vals, members = [], []
        for h in self.h_grid:
            ft = h * (t - self.ell) + 1.0
            if ft <= 0.0:
                continue
            num = float(zdist.probs @ np.maximum(0.0, h * (j - self.ell) + 1.0))
            vals.append(math.log(num) - math.log(ft) if num > 0.0 else NEG_INF)
            members.append({"h": float(h), "ell": self.ell})
        return np.array(vals), members


@dataclass(frozen=True)
class BinomCoeffFamily:
    """f(j) = C(j,k) on integers (0 below k), linear in between."""

    k: int

    def _f(self, x: float) -> float:
        lo, hi = math.floor(x), math.ceil(x)
        f_lo = math.comb(lo, self.k) if lo >= self.k else 0
        f_hi = math.comb(hi, self.k) if hi >= self.k else 0
        if lo == hi:
            return float(f_lo)
        return f_lo + (x - lo) * (f_hi - f_lo)

    def log_values(self, zdist: ZDist, t: float):
        ft = self._f(t)
        if ft <= 0.0:
            return np.array([]), []
        j = np.arange(zdist.n + 1)
        fj = np.array([self._f(float(v)) for v in j])
        num = float(zdist.probs @ fj)
        val = math.log(num) - math.log(ft) if num > 0.0 else NEG_INF
        return np.array([val]), [{"k": self.k}]


def dephoeff_bound(zdist: ZDist, t: float, family) -> TailBound:
    """Best tail bound (1/f(t)) * E[f(Z)] over a convex-function family.

    The infimum over all increasing convex functions is not computable;
    the reported value is the best member found on the family's grid and
    is always an upper bound on P[sum X_i >= t].
    """
    method = "convex-family"
    mean = zdist.mean()
    if t <= mean:
        return _invalid(method, "t <= mean")
    if t >= zdist.n:
        return _invalid(method, "t >= n")
    vals, members = family.log_values(zdist, t)
    if len(vals) == 0:
        return _invalid(method, "family has no valid member at this t")
    idx = int(np.argmin(vals))
    params = {"member": members[idx], "family": type(family).__name__}
    return TailBound(method, _clamp(float(vals[idx]), params), params)


# ---------------------------------------------------------------------------
# moments and classical orderings


def _esp(x: np.ndarray, k: int) -> float:
    """Elementary symmetric polynomial e_k(x) by the O(nk) recurrence."""
    e = np.zeros(k + 1)
    e[0] = 1.0
    for xi in x:
        e[1:] = e[1:] + xi * e[:-1]
    return float(e[k])


def symmetric_moment(dist: JointDist, k: int) -> float:
    """Exact E[S_k] = E[sum over |A|=k of prod_{i in A} X_i].

    Per-atom elementary-symmetric recurrence, no 2^n blowup.
    """
    if not 0 <= k <= dist.n:
        raise ValueError(f"k={k} outside [0, {dist.n}]")
    if k == 0:
        return 1.0
    total = 0.0
    for w, x in zip(dist.ws, dist.xs):
        total += w * _esp(x, k)
    return total


def convex_order_check(ps: PoissonBinomialSpec, h: float) -> bool:
    """True iff E[exp(h*H(p_1..p_n))] <= E[exp(h*Bin(n, pbar))], exactly."""
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h}")
    n, pbar = ps.n, ps.mean
    lhs_dist = poisson_binom_dist(ps)
    rhs_dist = poisson_binom_dist(PoissonBinomialSpec((pbar,) * n))
    j = np.arange(n + 1)
    # compare in log scale so large h stays finite
    lhs = logsumexp(h * j, b=lhs_dist)
    rhs = logsumexp(h * j, b=rhs_dist)
    return bool(lhs <= rhs + 1e-12)


def poisson_trials_check(ps: PoissonBinomialSpec, b: int) -> bool:
    """True iff P[sum B_i >= b] >= P[Bin(n, pbar) >= b], for 0 <= b <= n*pbar."""
    n, pbar = ps.n, ps.mean
    if b < 0 or b > n * pbar + 1e-12:
        raise ValueError(f"b={b} outside [0, n*pbar={n * pbar}]")
    lhs = float(poisson_binom_dist(ps)[b:].sum())
    rhs = float(poisson_binom_dist(PoissonBinomialSpec((pbar,) * n))[b:].sum())
    return lhs >= rhs - 1e-12


# ---------------------------------------------------------------------------
# subset-moment transforms (bitmask indexed, n <= 20)


def subset_product_moments(dist: JointDist) -> np.ndarray:
    """E[prod_{i in A} X_i] for every subset A (bitmask indexed)."""
    n = dist.n
    if n > MAX_ENUM_N:
        raise ValueError(f"n={n} exceeds cap {MAX_ENUM_N}")
    out = np.zeros(1 << n)
    for w, x in zip(dist.ws, dist.xs):
        prods = np.array([1.0])
        for xi in x:
            prods = np.concatenate([prods, prods * xi])
        out += w * prods
    return out


def subset_zeta_moments(dist: JointDist) -> np.ndarray:
    """E[Z_A] for every subset A (bitmask indexed)."""
    n = dist.n
    if n > MAX_ENUM_N:
        raise ValueError(f"n={n} exceeds cap {MAX_ENUM_N}")
    out = np.zeros(1 << n)
    for w, x in zip(dist.ws, dist.xs):
        out += w * zeta_decomposition(x)
    return out


def _check_product_constraint(dist: JointDist, gamma: float) -> float | None:
    """Largest violation of E[prod_A X] <= gamma^|A|, or None if satisfied."""
    moments = subset_product_moments(dist)
    sizes = np.array([bin(m).count("1") for m in range(len(moments))])
    excess = moments[1:] - gamma ** sizes[1:]
    worst = float(excess.max())
    return worst if worst > 1e-12 else None


def _check_split_constraint(dist: JointDist, gamma: float, delta: float):
    moments = subset_zeta_moments(dist)
    n = dist.n
    sizes = np.array([bin(m).count("1") for m in range(len(moments))])
    excess = moments - gamma ** sizes * delta ** (n - sizes)
    worst = float(excess.max())
    return worst if worst > 1e-12 else None


def random_joint_dist(
    n: int,
    profile_constraint=None,
    seed: int = 0,
    bernoulli: bool = True,
    max_attempts: int = 100_000,
) -> JointDist:
    """Seeded generator of valid joint distributions.

    With a :class:`ProductBound` or :class:`SplitBound` constraint the
    candidate is a mixture of product-Bernoulli components whose rates are
    confined to the feasible interval, and the subset-moment condition is
    then verified exhaustively; candidates failing verification are
    rejected.  Deterministic given the seed.
    """
    if bernoulli and n > 12:
        raise ValueError(f"Bernoulli full-support generation capped at n=12, got {n}")
    rng = np.random.default_rng(seed)
    worst = None
    for _ in range(max_attempts):
        dist = _candidate(rng, n, profile_constraint, bernoulli)
        if profile_constraint is None:
            return dist
        if isinstance(profile_constraint, ProductBound):
            worst = _check_product_constraint(dist, profile_constraint.gamma)
        elif isinstance(profile_constraint, SplitBound):
            worst = _check_split_constraint(
                dist, profile_constraint.gamma, profile_constraint.delta
            )
        else:
            raise TypeError(f"unsupported constraint {profile_constraint!r}")
        if worst is None:
            return dist
    raise GenerationError(
        f"no valid distribution in {max_attempts} attempts; "
        f"tightest violated margin {worst:.3g}"
    )


def _candidate(rng, n, constraint, bernoulli) -> JointDist:
    if constraint is None:
        if bernoulli:
            m = int(rng.integers(2, min(16, 1 << n) + 1))
            masks = rng.choice(1 << n, size=m, replace=False)
            xs = np.array(
                [[(mask >> i) & 1 for i in range(n)] for mask in masks],
                dtype=float,
            )
        else:
            m = int(rng.integers(2, 9))
            xs = rng.random((m, n))
        ws = rng.dirichlet(np.ones(m))
        ws = ws / math.fsum(ws)
        return JointDist(n=n, xs=xs, ws=ws)
    if isinstance(constraint, ProductBound):
        lo, hi = 0.0, constraint.gamma
    elif isinstance(constraint, SplitBound):
        lo, hi = 1.0 - constraint.delta, constraint.gamma
    else:
        raise TypeError(f"unsupported constraint {constraint!r}")
    comps = int(rng.integers(2, 6))
    rates = lo + (hi - lo) * rng.random((comps, n))
    mix = rng.dirichlet(np.ones(comps))
    if bernoulli:
        # expand the mixture of product-Bernoulli laws over all 2^n outcomes
        outcome_probs = np.zeros(1 << n)
        for w, q in zip(mix, rates):
            outcome_probs += w * zeta_decomposition(q)
        keep = outcome_probs > 0.0
        masks = np.nonzero(keep)[0]
        xs = np.array(
            [[(mask >> i) & 1 for i in range(n)] for mask in masks], dtype=float
        )
        ws = outcome_probs[keep]
        ws = ws / math.fsum(ws)
        return JointDist(n=n, xs=xs, ws=ws)
    ws = mix / math.fsum(mix)
    return JointDist(n=n, xs=rates, ws=ws)
