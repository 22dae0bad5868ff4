"""Closed-form replication success measures under the normal approximation.

The original and replication estimates are treated as normal with known
standard errors.  Everything is expressed through the original z-value
``z_o``, the replication z-value ``z_r``, the variance ratio
``c = se_o**2 / se_r**2`` and the relative effect estimate
``d = est_r / est_o = z_r / (z_o * sqrt(c))``.

Bayes factors are oriented so that small values are evidence against the
first-named hypothesis (against the null for ``bf_0s``/``replication_bf``,
against the sceptic for ``bf_sa``).  They are carried on the log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import (
    DomainError,
    find_root,
    gaussian_cdf,
    gaussian_logcdf,
    lambert_w,
    lambert_wm1_from_log,
)

__all__ = [
    "DegenerateError",
    "StudySummary",
    "ReplicationPair",
    "BayesFactorValue",
    "NONEXISTENT",
    "GOLDEN_RATIO",
    "derive_pair",
    "bf_0s",
    "min_bf",
    "g_min_bf",
    "z_from_min_bf",
    "sufficiently_sceptical_g",
    "bf_sa",
    "bf_sa_truncated",
    "sceptical_bf",
    "replication_bf",
    "two_trials",
    "z_gamma",
    "sceptical_z",
    "sceptical_p",
    "q_statistic",
    "format_bf",
    "format_p",
]

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

# tangency of the two Bayes factor curves counts as an intersection
_TOUCH_TOL = 1e-12


class DegenerateError(ValueError):
    """A derived quantity is undefined, e.g. a zero original estimate."""


@dataclass(frozen=True)
class StudySummary:
    """Effect estimate and standard error of one study."""

    estimate: float
    std_error: float

    def __post_init__(self):
        if not (math.isfinite(self.estimate) and math.isfinite(self.std_error)):
            raise DomainError("estimate and standard error must be finite")
        if self.std_error <= 0:
            raise DomainError("standard error must be positive")

    @property
    def z(self) -> float:
        return self.estimate / self.std_error


@dataclass(frozen=True)
class ReplicationPair:
    """Summary quantities linking an original and a replication study."""

    z_o: float
    z_r: float
    c: float
    d: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("variance ratio c must be positive")

    @classmethod
    def from_z(cls, z_o: float, z_r: float, c: float = 1.0) -> "ReplicationPair":
        if z_o == 0:
            raise DegenerateError("relative effect estimate undefined for z_o = 0")
        return cls(z_o, z_r, c, z_r / (z_o * math.sqrt(c)))

    @classmethod
    def from_relative(cls, z_o: float, d: float, c: float = 1.0) -> "ReplicationPair":
        return cls(z_o, d * z_o * math.sqrt(c), c, d)


@dataclass(frozen=True)
class BayesFactorValue:
    """A Bayes factor on the log scale; ``log_bf is None`` marks nonexistence."""

    log_bf: float | None

    @property
    def exists(self) -> bool:
        return self.log_bf is not None

    @property
    def value(self) -> float:
        return math.exp(self.log_bf) if self.log_bf is not None else math.nan

    def __float__(self) -> float:
        return self.value

    def format(self) -> str:
        return format_bf(self.value) if self.exists else ""


NONEXISTENT = BayesFactorValue(None)


def _check_level(gamma: float) -> float:
    if not 0.0 < gamma < 1.0:
        raise DomainError("level gamma must lie in (0, 1)")
    return float(gamma)


def derive_pair(original: StudySummary, replication: StudySummary) -> ReplicationPair:
    """Compute ``(z_o, z_r, c, d)`` from two study summaries."""
    if original.estimate == 0:
        raise DegenerateError("original estimate is zero; d is undefined")
    c = original.std_error ** 2 / replication.std_error ** 2
    return ReplicationPair(
        original.z, replication.z, c, replication.estimate / original.estimate
    )


# ---------------------------------------------------------------------------
# Bayes factor kernels (log scale, numpy-broadcastable)
# ---------------------------------------------------------------------------

def log_bf_0s(z_o, g):
    """Log Bayes factor of the point null against the sceptical prior N(0, g * se_o^2)."""
    g = np.asarray(g, dtype=float)
    return 0.5 * np.log1p(g) - 0.5 * g / (1.0 + g) * np.square(z_o)


def log_bf_sa(z_o, d, c, g):
    """Log Bayes factor of the sceptical prior against the advocacy prior."""
    inv_c = 1.0 / np.asarray(c, dtype=float)
    z2 = np.square(z_o)
    return 0.5 * (np.log(inv_c + 1.0) - np.log(inv_c + g)) - 0.5 * z2 * (
        np.square(d) / (inv_c + g) - np.square(d - 1.0) / (inv_c + 1.0)
    )


def log_truncation_factor(z_o, d, c):
    """Log of the correction turning the advocacy prior into its truncated version."""
    c = np.asarray(c, dtype=float)
    s = np.sign(z_o)
    return gaussian_logcdf(np.abs(z_o)) - gaussian_logcdf(
        s * z_o * (1.0 + d * c) / np.sqrt(1.0 + c)
    )


def log_min_bf(z):
    z = np.abs(np.asarray(z, dtype=float))
    with np.errstate(divide="ignore"):
        val = np.log(np.maximum(z, 1e-300)) - 0.5 * z * z + 0.5
    return np.where(z > 1.0, val, 0.0)


def g_min_bf(z_o) -> float:
    """Relative prior variance at which ``bf_0s`` attains its minimum."""
    return max(0.0, z_o * z_o - 1.0)


def g_gamma_array(z_o, gamma):
    """Sufficiently sceptical relative variance, ``nan`` where it does not exist."""
    shape = np.broadcast(np.asarray(z_o), np.asarray(gamma)).shape
    z2 = np.square(np.broadcast_to(np.asarray(z_o, dtype=float), shape)).ravel()
    lg = np.broadcast_to(np.log(np.asarray(gamma, dtype=float)), shape).ravel()
    g = np.full(z2.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_arg = np.log(z2) - z2 - 2.0 * lg
        ok = (z2 > 0) & (log_arg <= -1.0)
        if np.any(ok):
            ratio = -z2[ok] / lambert_wm1_from_log(log_arg[ok])
            g[ok] = np.where(ratio >= 1.0, ratio - 1.0, np.nan)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def bf_0s(z_o: float, g: float) -> BayesFactorValue:
    """Bayes factor contrasting the null with a sceptical prior of relative variance ``g``."""
    if g < 0:
        raise DomainError("relative prior variance must be non-negative")
    return BayesFactorValue(float(log_bf_0s(z_o, g)))


def min_bf(z: float) -> BayesFactorValue:
    """Minimum of ``bf_0s`` over ``g >= 0`` (equal to 1 when ``|z| <= 1``)."""
    return BayesFactorValue(float(log_min_bf(z)))


def z_from_min_bf(bf: float) -> float:
    """Positive z-value whose minimum Bayes factor equals ``bf`` (``0 < bf < 1``)."""
    if not 0.0 < bf < 1.0:
        raise DomainError("minimum Bayes factor must lie in (0, 1)")
    # z^2 exp(-z^2) = bf^2 / e, larger root
    return math.sqrt(-float(lambert_wm1_from_log(2.0 * math.log(bf) - 1.0)))


def sufficiently_sceptical_g(z_o: float, gamma: float) -> float | None:
    """Relative variance ``g`` in ``[0, g_min_bf]`` with ``bf_0s(z_o, g) = gamma``.

    Returns ``None`` when the original study is not convincing at level
    ``gamma`` (its minimum Bayes factor exceeds ``gamma``).
    """
    _check_level(gamma)
    g = float(g_gamma_array(z_o, gamma))
    return None if math.isnan(g) else g


def bf_sa(pair: ReplicationPair, g: float) -> BayesFactorValue:
    """Replication Bayes factor of the sceptical prior against the advocacy prior."""
    if g < 0:
        raise DomainError("relative prior variance must be non-negative")
    return BayesFactorValue(float(log_bf_sa(pair.z_o, pair.d, pair.c, g)))


def bf_sa_truncated(pair: ReplicationPair, g: float) -> BayesFactorValue:
    """As :func:`bf_sa`, with the advocacy prior truncated to the sign of the original estimate."""
    if pair.z_o == 0:
        raise DegenerateError("truncation direction undefined for z_o = 0")
    lt = float(log_truncation_factor(pair.z_o, pair.d, pair.c))
    return BayesFactorValue(bf_sa(pair, g).log_bf + lt)


def replication_bf(pair: ReplicationPair, truncate: bool = False) -> BayesFactorValue:
    """Bayes factor of the point null against the advocacy prior given the replication."""
    c, d, z2 = pair.c, pair.d, pair.z_o ** 2
    log_bf = 0.5 * math.log1p(c) - 0.5 * z2 * (d * d * c - (1.0 - d) ** 2 / (1.0 / c + 1.0))
    if truncate:
        if pair.z_o == 0:
            raise DegenerateError("truncation direction undefined for z_o = 0")
        log_bf += float(log_truncation_factor(pair.z_o, d, c))
    return BayesFactorValue(log_bf)


# -- sceptical Bayes factor -------------------------------------------------

def _residual(pair: ReplicationPair, truncate: bool):
    offset = float(log_truncation_factor(pair.z_o, pair.d, pair.c)) if truncate else 0.0

    def h(g):
        return float(log_bf_sa(pair.z_o, pair.d, pair.c, g) - log_bf_0s(pair.z_o, g)) + offset

    return h


def _critical_points(pair: ReplicationPair, g_max: float) -> list[float]:
    # derivative of the residual, multiplied by (1+g)^2 (1/c+g)^2, is a cubic in g
    a, z2, d2 = 1.0 / pair.c, pair.z_o ** 2, pair.d ** 2
    coeffs = [
        -2.0,
        z2 * (d2 + 1.0) - 3.0 * (1.0 + a),
        2.0 * z2 * (d2 + a) - (1.0 + a) ** 2 - 2.0 * a,
        z2 * (d2 + a * a) - a * (1.0 + a),
    ]
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots.real))].real
    return sorted(float(r) for r in real if 0.0 < r < g_max)


def _search_g_star(pair: ReplicationPair, truncate: bool) -> tuple[str, float]:
    """Locate the largest ``g`` in ``[0, g_min_bf]`` where replication success holds.

    Returns ``("none", nan)``, ``("bound", g_max)`` or ``("root", g)``.
    """
    g_max = g_min_bf(pair.z_o)
    h = _residual(pair, truncate)
    if h(g_max) <= _TOUCH_TOL:
        return "bound", g_max
    nodes = [0.0] + _critical_points(pair, g_max) + [g_max]
    values = [h(g) for g in nodes]
    # h is monotone between consecutive nodes, so its minimum sits on a node
    below = [i for i, v in enumerate(values) if v <= _TOUCH_TOL]
    if not below:
        return "none", math.nan
    j = below[-1]
    if values[j] > 0:
        return "root", nodes[j]
    lo, hi = nodes[j], nodes[j + 1]
    tol = 1e-14 * max(1.0, hi)
    return "root", find_root(h, (lo, hi), tol=tol)


def _closed_form_c1(pair: ReplicationPair) -> float | None:
    """Intersection ``g`` for ``c = 1`` through the Lambert W function.

    Both real branches are tried; the admissible solution must lie in
    ``[0, g_min_bf]``.  Returns ``None`` when neither branch gives one.
    """
    z2, d = pair.z_o ** 2, pair.d
    s = (1.0 + d * d) / 2.0
    g_max = g_min_bf(pair.z_o)
    log_neg_arg = math.log(z2 / math.sqrt(2.0) * s) - 0.5 * z2 * (1.0 + (1.0 - d) ** 2 / 2.0)
    if log_neg_arg > -1.0:
        return None
    ks = [lambert_wm1_from_log(log_neg_arg)]
    if log_neg_arg > -700.0:
        ks.append(lambert_w(-math.exp(log_neg_arg), "principal"))
    candidates = []
    for k in ks:
        ratio = -z2 * s / k
        if ratio >= 1.0 and ratio - 1.0 <= g_max:
            candidates.append(ratio - 1.0)
    return max(candidates) if candidates else None


def sceptical_bf(pair: ReplicationPair, truncate: bool = False, method: str = "auto") -> BayesFactorValue:
    """Sceptical Bayes factor: the smallest level at which replication success holds.

    Parameters
    ----------
    pair : ReplicationPair
    truncate : bool
        Use the advocacy prior truncated to the direction of the original
        estimate, which rules out success for estimates of opposite sign.
    method : {"auto", "closed_form", "search"}
        ``"auto"`` uses the Lambert W solution when ``c == 1`` (and no
        truncation) and the bracketed search otherwise.

    Returns
    -------
    BayesFactorValue
        :data:`NONEXISTENT` when success cannot be established at any level.
    """
    if pair.z_o == 0:
        return NONEXISTENT
    use_closed = method == "closed_form" or (method == "auto" and pair.c == 1.0 and not truncate)
    if use_closed:
        if pair.c != 1.0 or truncate:
            raise ValueError("closed form is only available for c = 1 without truncation")
        h = _residual(pair, False)
        g_max = g_min_bf(pair.z_o)
        if h(g_max) <= _TOUCH_TOL:
            return BayesFactorValue(float(log_min_bf(pair.z_o)))
        g_star = _closed_form_c1(pair)
        if g_star is not None:
            return BayesFactorValue(float(log_bf_0s(pair.z_o, g_star)))
    elif method not in ("auto", "search"):
        raise ValueError(f"unknown method {method!r}")
    kind, g_star = _search_g_star(pair, truncate)
    if kind == "none":
        return NONEXISTENT
    if kind == "bound":
        return BayesFactorValue(float(log_min_bf(pair.z_o)))
    return BayesFactorValue(float(log_bf_0s(pair.z_o, g_star)))


def sceptical_bf_intersection(pair: ReplicationPair, truncate: bool = False) -> float | None:
    """Relative prior variance at which the sceptical Bayes factor is attained."""
    kind, g_star = _search_g_star(pair, truncate)
    return None if kind == "none" else g_star


# -- other measures -----------------------------------------------------------

def z_gamma(gamma: float) -> float:
    """The z-value ``> 1`` whose minimum Bayes factor equals ``gamma``."""
    _check_level(gamma)
    w = lambert_w(-gamma * gamma / math.e, "minus_one")
    return math.sqrt(-w)


def two_trials(pair: ReplicationPair, gamma: float) -> bool:
    """Both minimum Bayes factors below ``gamma`` and estimates of the same sign."""
    lg = math.log(_check_level(gamma))
    return bool(
        log_min_bf(pair.z_o) < lg
        and log_min_bf(pair.z_r) < lg
        and np.sign(pair.z_o) == np.sign(pair.z_r)
    )


def sceptical_z(z_o, z_r, c):
    """The z-value of the sceptical p-value (always non-negative)."""
    z_o = np.asarray(z_o, dtype=float)
    z_r = np.asarray(z_r, dtype=float)
    c = np.asarray(c, dtype=float)
    zo2, zr2 = z_o * z_o, z_r * z_r
    with np.errstate(divide="ignore", invalid="ignore"):
        zh2 = 2.0 / (1.0 / zo2 + 1.0 / zr2)
        za2 = (zo2 + zr2) / 2.0
        # rationalised form of (sqrt(za2 (za2 + (c-1) zh2)) - za2) / (c - 1);
        # no cancellation, and c = 1 gives zh2 / 2
        zs2 = za2 * zh2 / (np.sqrt(za2 * (za2 + (c - 1.0) * zh2)) + za2)
    return np.sqrt(np.maximum(zs2, 0.0))


def sceptical_p(pair: ReplicationPair, recalibrate: bool = False) -> float:
    """One-sided sceptical p-value, optionally recalibrated to the golden level."""
    if pair.z_o == 0 or pair.z_r == 0:
        raise DegenerateError("sceptical p-value needs non-zero z_o and z_r")
    zs = float(sceptical_z(pair.z_o, pair.z_r, pair.c))
    if recalibrate:
        zs *= math.sqrt(GOLDEN_RATIO)
    same_sign = np.sign(pair.z_o) == np.sign(pair.z_r)
    return float(gaussian_cdf(-zs) if same_sign else gaussian_cdf(zs))


def q_statistic(pair: ReplicationPair) -> float:
    """Squared difference of the estimates scaled by the sum of their variances."""
    return pair.z_o ** 2 * (pair.d - 1.0) ** 2 / (1.0 / pair.c + 1.0)


# ---------------------------------------------------------------------------
# Display
# ---------------------------------------------------------------------------

def _trim(x: float, decimals: int) -> str:
    s = f"{x:.{decimals}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


def format_bf(bf: float) -> str:
    """Format a Bayes factor the way results tables report them.

    Values below one are written as ``1/x``; ``x`` is rounded to one decimal
    when below 10 and to an integer otherwise.  Extreme values saturate to
    ``"< 1/1000"`` and ``"> 1000"``.
    """
    if bf is None or math.isnan(bf):
        return ""
    if bf < 1.0 / 1000.0:
        return "< 1/1000"
    if bf > 1000.0:
        return "> 1000"
    if bf < 1.0:
        inv = 1.0 / bf
        text = _trim(inv, 0) if inv >= 10.0 else _trim(inv, 1)
        return "1" if text == "1" else "1/" + text
    return _trim(bf, 0) if bf >= 10.0 else _trim(bf, 1)


def format_p(p: float) -> str:
    """Format a p-value: ``"< 0.0001"``, one significant digit below 0.01, two above."""
    if p is None or math.isnan(p):
        return ""
    if p < 1e-4:
        return "< 0.0001"
    digits = 1 if p < 0.01 else 2
    s = f"{p:.{digits}g}"
    if "e" in s:
        s = _trim(float(s), 6)
    return s
