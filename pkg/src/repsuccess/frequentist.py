"""Success regions, shrinkage limits and frequentist operating characteristics.

Every method is summarised by the set of relative effect estimates ``d`` that
lead to replication success for a given original z-value ``z_o``, variance
ratio ``c`` and level ``gamma``.  Because ``z_r = d * z_o * sqrt(c)`` is the
only random quantity once the original study is completed, success
probabilities follow from the normal law of ``z_r``.

Methods are named ``"sceptical_bf"``, ``"two_trials"``, ``"replication_bf"``
and ``"sceptical_p"``.  The sceptical p-value is recalibrated to the golden
level by default (success iff ``p_tilde <= 1 - Phi(z_gamma)``); pass
``alpha`` to use the plain sceptical p-value with threshold ``alpha`` instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    DomainError,
    gaussian_cdf,
    gaussian_quantile,
    integrate,
    noncentral_chisq_cdf,
    noncentral_chisq_sf,
)
from .normal_model import (
    GOLDEN_RATIO,
    ReplicationPair,
    g_gamma_array,
    log_bf_sa,
    log_min_bf,
    log_truncation_factor,
    sceptical_bf,
    sceptical_z,
    sufficiently_sceptical_g,
    z_gamma,
)

__all__ = [
    "METHODS",
    "SuccessRegion",
    "SamplingHypothesis",
    "RateResult",
    "succeeds",
    "success_region",
    "paradox_thresholds",
    "d_min_limit",
    "prob_success",
    "type1_error",
    "monte_carlo_rate",
    "information_consistency_check",
]

METHODS = ("sceptical_bf", "two_trials", "replication_bf", "sceptical_p")

# draws per Monte Carlo substream; fixed so results do not depend on workers
_BLOCK = 1 << 16


def _check_method(method: str) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return method


def _check_gamma(gamma: float) -> float:
    if not 0.0 < gamma < 1.0:
        raise DomainError("level gamma must lie in (0, 1)")
    return float(gamma)


def _p_threshold(gamma: float, alpha: float | None) -> float:
    """z-threshold on ``z_S`` for sceptical p-value success."""
    if alpha is not None:
        return float(gaussian_quantile(1.0 - alpha))
    return z_gamma(gamma) / math.sqrt(GOLDEN_RATIO)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuccessRegion:
    """Union of disjoint closed intervals of ``d`` achieving success.

    Attributes
    ----------
    intervals : tuple of (lo, hi)
        Ordered, disjoint; endpoints may be infinite.  Empty when success is
        impossible.
    method : str
    """

    intervals: tuple
    method: str

    def __post_init__(self):
        prev = -math.inf
        for lo, hi in self.intervals:
            if lo > hi or lo < prev:
                raise DomainError("region intervals must be ordered and disjoint")
            prev = hi

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0

    def contains(self, d):
        d = np.asarray(d, dtype=float)
        out = np.zeros(d.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (d >= lo) & (d <= hi)
        return out if out.ndim else bool(out)

    @property
    def d_min(self) -> float | None:
        """Smallest positive ``d`` in the region (its infimum), if any."""
        for lo, hi in self.intervals:
            if hi > 0:
                return max(lo, 0.0)
        return None

    @property
    def d_max(self) -> float | None:
        """Largest ``d`` in the region; ``inf`` if unbounded above."""
        return self.intervals[-1][1] if self.intervals else None


@dataclass(frozen=True)
class SamplingHypothesis:
    """Normal law ``z_r ~ N(mu_zr, var_zr)`` under which rates are computed."""

    mu_zr: float
    var_zr: float
    kind: str

    def __post_init__(self):
        if not self.var_zr > 0:
            raise DomainError("variance of z_r must be positive")
        if self.kind not in ("null", "conditional", "predictive"):
            raise DomainError(f"unknown hypothesis kind {self.kind!r}")

    @classmethod
    def null(cls) -> "SamplingHypothesis":
        return cls(0.0, 1.0, "null")

    @classmethod
    def conditional(cls, z_o: float, c: float) -> "SamplingHypothesis":
        """True effect equal to the original estimate."""
        return cls(z_o * math.sqrt(c), 1.0, "conditional")

    @classmethod
    def predictive(cls, z_o: float, c: float) -> "SamplingHypothesis":
        """Prior predictive under the advocacy prior."""
        return cls(z_o * math.sqrt(c), 1.0 + c, "predictive")


@dataclass(frozen=True)
class RateResult:
    probability: float
    method: str
    gamma: float
    mc_std_error: float | None = field(default=None)

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise DomainError(f"probability {self.probability} outside [0, 1]")


# ---------------------------------------------------------------------------
# Direct success criteria (vectorised)
# ---------------------------------------------------------------------------

def succeeds(method, z_o, z_r, c, gamma, truncate=False, alpha=None):
    """Evaluate a method's success criterion element-wise.

    This is the reference definition used to check regions and as the Monte
    Carlo criterion; it never goes through the region algebra.
    """
    _check_method(method)
    lg = math.log(_check_gamma(gamma))
    z_o, z_r, c = np.broadcast_arrays(
        np.asarray(z_o, dtype=float), np.asarray(z_r, dtype=float), np.asarray(c, dtype=float)
    )
    same_sign = np.sign(z_o) == np.sign(z_r)
    if method == "two_trials":
        return (log_min_bf(z_o) < lg) & (log_min_bf(z_r) < lg) & same_sign & (z_r != 0)
    if method == "sceptical_p":
        zs = sceptical_z(z_o, z_r, c)
        return same_sign & (zs >= _p_threshold(gamma, alpha)) & (z_r != 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = z_r / (z_o * np.sqrt(c))
    if method == "replication_bf":
        log_bf = 0.5 * np.log1p(c) - 0.5 * z_o ** 2 * (d * d * c - (1.0 - d) ** 2 / (1.0 / c + 1.0))
    else:
        g = g_gamma_array(z_o, gamma)
        with np.errstate(invalid="ignore"):
            log_bf = np.where(np.isnan(g), np.inf, log_bf_sa(z_o, d, c, np.nan_to_num(g)))
    if truncate:
        with np.errstate(invalid="ignore"):
            log_bf = log_bf + log_truncation_factor(z_o, d, c)
    return (log_bf <= lg) & (z_o != 0)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def _quadratic_region(a2: float, a1: float, a0: float) -> tuple:
    """Intervals where ``a2*d^2 + a1*d + a0 >= 0`` for ``a1 > 0``.

    Roots are formed in the cancellation-free order so the region stays
    accurate when ``a2`` passes through zero.
    """
    if a2 == 0.0:
        return ((-a0 / a1, math.inf),)
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        return ((-math.inf, math.inf),) if a2 > 0 else ()
    q = -0.5 * (a1 + math.sqrt(disc))
    r1, r2 = sorted((a0 / q, q / a2))
    if a2 > 0:
        return ((-math.inf, r1), (r2, math.inf))
    return ((r1, r2),)


def _sceptical_bf_quadratic(z_o: float, inv_c: float, g: float):
    # coefficients of  B d^2 + 2d/(1/c+1) - {1/(1/c+1) + L} >= 0 ; with
    # region constants M = (1/c+g)/(g-1), A = L + 1/(1-g), B as below
    region_B = (1.0 - g) / ((inv_c + g) * (inv_c + 1.0))
    L = math.log((inv_c + 1.0) / ((inv_c + g) * (1.0 + g))) / z_o ** 2 + g / (1.0 + g)
    return region_B, 2.0 / (inv_c + 1.0), -(1.0 / (inv_c + 1.0) + L)


def _region_intervals(method, z_o, c, gamma, alpha=None) -> tuple:
    lg = math.log(gamma)
    inv_c = 1.0 / c
    z2 = z_o * z_o
    if method == "sceptical_bf":
        g = sufficiently_sceptical_g(z_o, gamma)
        if g is None:
            return ()
        return _quadratic_region(*_sceptical_bf_quadratic(z_o, inv_c, g))
    if method == "two_trials":
        zg = z_gamma(gamma)
        if not log_min_bf(z_o) < lg:
            return ()
        return ((zg / (abs(z_o) * math.sqrt(c)), math.inf),)
    if method == "replication_bf":
        region_K = (1.0 + (math.log1p(c) - 2.0 * lg) / z2) * (inv_c + 1.0) / c
        region_H = inv_c
        root = math.sqrt(region_K)
        return ((-math.inf, -root - region_H), (root - region_H, math.inf))
    z_thr = _p_threshold(gamma, alpha)
    ratio = z2 / z_thr ** 2
    if ratio <= 1.0:
        return ()
    return ((math.sqrt((inv_c + 1.0 / (ratio - 1.0)) / ratio), math.inf),)


def success_region(method: str, z_o: float, c: float, gamma: float, alpha: float | None = None) -> SuccessRegion:
    """Set of relative effect estimates ``d`` achieving success.

    Parameters
    ----------
    method : str
        One of :data:`METHODS`.
    z_o : float
        Original z-value (non-zero).
    c : float
        Variance ratio ``se_o**2 / se_r**2``.
    gamma : float
        Level in (0, 1).
    alpha : float, optional
        Plain sceptical p-value threshold; only used by ``"sceptical_p"``.

    Returns
    -------
    SuccessRegion
    """
    _check_method(method)
    _check_gamma(gamma)
    if not c > 0:
        raise DomainError("variance ratio c must be positive")
    if z_o == 0:
        return SuccessRegion((), method)
    return SuccessRegion(_region_intervals(method, z_o, c, gamma, alpha), method)


def paradox_thresholds(z_o: float, c: float, gamma: float, truncate: bool = False,
                       d_grid=None) -> dict:
    """Onset of success with estimates of opposite sign (replication paradox).

    Returns, for the two Bayes factor methods, the largest negative ``d``
    that still achieves success (``None`` if no negative ``d`` does).  With
    ``truncate`` the criterion is evaluated directly on ``d_grid`` (default
    ``[-20, 0)`` in steps of 0.001) because the truncated region has no closed
    form.
    """
    out = {}
    for method in ("sceptical_bf", "replication_bf"):
        if truncate:
            grid = np.arange(-20.0, 0.0, 1e-3) if d_grid is None else np.asarray(d_grid, dtype=float)
            ok = succeeds(method, z_o, grid * z_o * math.sqrt(c), c, gamma, truncate=True)
            out[method] = float(grid[ok].max()) if np.any(ok) else None
            continue
        region = success_region(method, z_o, c, gamma)
        negative = [hi for lo, hi in region.intervals if lo < 0 and hi < 0]
        out[method] = negative[-1] if negative else None
    return out


def d_min_limit(method: str, limit_kind: str, gamma: float, z_o: float | None = None,
                c: float | None = None, alpha: float | None = None) -> float:
    """Closed-form limit of the smallest successful positive ``d``.

    Parameters
    ----------
    limit_kind : {"c_to_infinity", "zo2_to_infinity"}
        ``"c_to_infinity"`` holds ``z_o`` fixed; ``"zo2_to_infinity"`` holds
        ``c`` fixed.

    Returns
    -------
    float
        Zero signals the shrinkage paradox in that direction.
    """
    _check_method(method)
    _check_gamma(gamma)
    if limit_kind == "c_to_infinity":
        if z_o is None:
            raise ValueError("z_o is required for the c limit")
        if method in ("two_trials", "replication_bf"):
            return 0.0
        if method == "sceptical_p":
            ratio = z_o ** 2 / _p_threshold(gamma, alpha) ** 2
            if ratio <= 1.0:
                raise DomainError("original study not convincing at this level")
            return math.sqrt(1.0 / (ratio * (ratio - 1.0)))
        g = sufficiently_sceptical_g(z_o, gamma)
        if g is None:
            raise DomainError("original study not convincing at this level")
        region = SuccessRegion(_quadratic_region(*_sceptical_bf_quadratic(z_o, 0.0, g)), method)
        return region.d_min
    if limit_kind == "zo2_to_infinity":
        if c is None:
            raise ValueError("c is required for the z_o limit")
        if method in ("two_trials", "sceptical_p"):
            return 0.0
        base = math.sqrt((1.0 / c + 1.0) / c)
        if method == "replication_bf":
            return base - (1.0 / c + 1.0) / (1.0 + c)
        return base - 1.0 / c
    raise ValueError(f"unknown limit kind {limit_kind!r}")


# ---------------------------------------------------------------------------
# Success probabilities
# ---------------------------------------------------------------------------

def _prob_sceptical_bf(z_o, c, gamma, hyp):
    g = sufficiently_sceptical_g(z_o, gamma)
    if g is None:
        return 0.0
    mu, var = hyp.mu_zr, hyp.var_zr
    sd = math.sqrt(var)
    if g == 1.0:
        power_D = (z_o ** 2 * (0.5 + 1.0 / (1.0 / c + 1.0)) - math.log(2.0)) * (1.0 + c) / (2.0 * z_o * math.sqrt(c))
        return float(gaussian_cdf(math.copysign(1.0, z_o) * (mu - power_D) / sd))
    power_A = math.log((1.0 / c + 1.0) / ((1.0 / c + g) * (1.0 + g))) + z_o ** 2 * (
        g / (1.0 + g) + 1.0 / (1.0 - g)
    )
    power_B = (1.0 - g) / ((1.0 + c * g) * (1.0 / c + 1.0))
    power_M = z_o * (1.0 + c * g) / (math.sqrt(c) * (g - 1.0))
    lam = (mu - power_M) ** 2 / var
    x = power_A / (power_B * var)
    if g < 1.0:
        return 1.0 if x <= 0 else float(noncentral_chisq_sf(x, 1, lam))
    return 0.0 if x <= 0 else float(noncentral_chisq_cdf(x, 1, lam))


def _prob_replication_bf(z_o, c, gamma, hyp):
    var = hyp.var_zr
    lam = (hyp.mu_zr + z_o / math.sqrt(c)) ** 2 / var
    x = (z_o ** 2 + math.log1p(c) - 2.0 * math.log(gamma)) * (1.0 + 1.0 / c) / var
    return float(noncentral_chisq_sf(x, 1, lam))


def _prob_half_line(region: SuccessRegion, z_o, c, hyp):
    # region [t, inf) in d  <=>  sign(z_o) z_r >= t |z_o| sqrt(c)
    if region.is_empty:
        return 0.0
    t = region.intervals[0][0]
    s = math.copysign(1.0, z_o)
    return float(gaussian_cdf((s * hyp.mu_zr - t * abs(z_o) * math.sqrt(c)) / math.sqrt(hyp.var_zr)))


def _prob(method, z_o, c, gamma, hyp, alpha=None) -> float:
    if z_o == 0:
        return 0.0
    if method == "sceptical_bf":
        return _prob_sceptical_bf(z_o, c, gamma, hyp)
    if method == "replication_bf":
        return _prob_replication_bf(z_o, c, gamma, hyp)
    return _prob_half_line(success_region(method, z_o, c, gamma, alpha), z_o, c, hyp)


def prob_success(method: str, z_o: float, c: float, gamma: float,
                 hyp: SamplingHypothesis, alpha: float | None = None) -> RateResult:
    """Probability of replication success given the original z-value.

    The Bayes factor methods use the noncentral chi-squared representation
    with one degree of freedom; the two-trials rule and the sceptical
    p-value have half-line regions in ``d`` and reduce to one normal
    probability.
    """
    _check_method(method)
    _check_gamma(gamma)
    if not c > 0:
        raise DomainError("variance ratio c must be positive")
    p = min(max(_prob(method, z_o, c, gamma, hyp, alpha), 0.0), 1.0)
    return RateResult(p, method, gamma)


def _lower_limit(method, gamma, alpha):
    if method == "sceptical_bf":
        return z_gamma(gamma)
    if method == "sceptical_p":
        return _p_threshold(gamma, alpha)
    return 0.0


def type1_error(method: str, gamma: float, c: float, alpha: float | None = None,
                rel_tol: float = 1e-6) -> RateResult:
    """Global type I error rate when both studies are generated under the null.

    Integrates the null success probability against the standard normal
    density of ``z_o`` over ``(z_low, inf)`` and doubles it for the mirror
    image ``z_o < 0``.  The two-trials rule uses its closed form.
    """
    _check_method(method)
    _check_gamma(gamma)
    if not c > 0:
        raise DomainError("variance ratio c must be positive")
    null = SamplingHypothesis.null()
    if method == "two_trials":
        p = 2.0 * float(gaussian_cdf(-z_gamma(gamma))) ** 2
        return RateResult(p, method, gamma)

    def integrand(z):
        return _prob(method, z, c, gamma, null, alpha) * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)

    lo = _lower_limit(method, gamma, alpha)
    pieces = [lo]
    if method == "sceptical_bf":
        # g_gamma crosses one here and the region changes shape
        z_one = math.sqrt(4.0 * math.log(math.sqrt(2.0) / gamma))
        if z_one > lo:
            pieces.append(z_one)
    total = 0.0
    for a, b in zip(pieces, pieces[1:] + [math.inf]):
        total += integrate(integrand, (a, b), rel_tol=rel_tol, abs_tol=1e-13).value
    return RateResult(min(max(2.0 * total, 0.0), 1.0), method, gamma)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _mc_block(args):
    method, gamma, c, truth, z_o, size, seed, index, alpha = args
    # substream i is seeded by (seed, i): identical for any worker layout
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    if truth == "null":
        zo = rng.standard_normal(size)
        zr = rng.standard_normal(size)
    else:
        zo = np.full(size, float(z_o))
        sd = 1.0 if truth == "conditional" else math.sqrt(1.0 + c)
        zr = z_o * math.sqrt(c) + sd * rng.standard_normal(size)
    return int(np.count_nonzero(succeeds(method, zo, zr, c, gamma, alpha=alpha)))


def monte_carlo_rate(method: str, gamma: float, c: float, truth: str, n_sims: int,
                     seed: int, z_o: float | None = None, alpha: float | None = None,
                     workers: int = 1) -> RateResult:
    """Empirical success frequency by simulation.

    Parameters
    ----------
    truth : {"null", "conditional", "predictive"}
        ``"null"`` draws both z-values from N(0, 1) (global type I error);
        the other two hold ``z_o`` fixed and draw ``z_r`` from the
        corresponding :class:`SamplingHypothesis`.
    n_sims : int
        Number of draws.
    seed : int
        The draws are split into blocks of 65536; block ``i`` uses the
        generator seeded by ``SeedSequence(seed, spawn_key=(i,))``, so the
        result depends only on ``seed`` and ``n_sims``, not on ``workers``.
    workers : int
        Threads used to evaluate blocks.

    Returns
    -------
    RateResult
        With binomial standard error ``sqrt(p(1 - p) / n)``.
    """
    _check_method(method)
    _check_gamma(gamma)
    if n_sims < 1:
        raise DomainError("n_sims must be at least 1")
    if truth not in ("null", "conditional", "predictive"):
        raise DomainError(f"unknown truth {truth!r}")
    if truth != "null" and z_o is None:
        raise ValueError("z_o is required for conditional and predictive truths")
    n_blocks = -(-n_sims // _BLOCK)
    jobs = [
        (method, gamma, c, truth, z_o, min(_BLOCK, n_sims - i * _BLOCK), seed, i, alpha)
        for i in range(n_blocks)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(_mc_block, jobs))
    else:
        hits = sum(map(_mc_block, jobs))
    p = hits / n_sims
    return RateResult(p, method, gamma, math.sqrt(p * (1.0 - p) / n_sims))


# ---------------------------------------------------------------------------
# Information consistency
# ---------------------------------------------------------------------------

def information_consistency_check(d: float, zo_grid) -> str:
    """Classify the large-sample trend of the sceptical Bayes factor.

    Both studies share the same precision (``c = 1``) and the replication
    z-value is ``d * z_o``.  The tail of the grid (last quarter, at least
    three points) decides: if the sceptical Bayes factor exists there and
    its logarithm decreases in ``z_o**2`` the result is
    ``"diverges_to_zero"``, otherwise ``"bounded_away"``.
    """
    zo_grid = np.asarray(zo_grid, dtype=float)
    if zo_grid.ndim != 1 or len(zo_grid) < 3 or np.any(np.diff(zo_grid) <= 0):
        raise DomainError("zo_grid must be an ascending grid of at least three values")
    n_tail = max(3, len(zo_grid) // 4)
    tail = zo_grid[-n_tail:]
    logs = []
    for z in tail:
        bf = sceptical_bf(ReplicationPair.from_relative(float(z), d, 1.0))
        if not bf.exists:
            return "bounded_away"
        logs.append(bf.log_bf)
    slope = np.polyfit(tail ** 2, np.asarray(logs), 1)[0]
    return "diverges_to_zero" if slope < 0 else "bounded_away"
