"""Special functions, quadrature and root finding shared by the other modules.

Everything here is pure and thread safe.  Array inputs are accepted where the
callers need vectorised evaluation (Monte Carlo, curve emission).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize as _optimize
from scipy import special as _special

__all__ = [
    "DomainError",
    "NonConvergenceError",
    "NoSignChangeError",
    "Interval",
    "QuadratureResult",
    "lambert_w",
    "lambert_wm1_from_log",
    "gaussian_cdf",
    "gaussian_logcdf",
    "gaussian_quantile",
    "noncentral_chisq_cdf",
    "noncentral_chisq_sf",
    "noncentral_t_logpdf",
    "integrate",
    "find_root",
]

_INV_E = math.exp(-1.0)


class DomainError(ValueError):
    """Argument outside the domain where a real result exists."""


class NoSignChangeError(ValueError):
    """The bracket passed to :func:`find_root` does not contain a sign change."""


class NonConvergenceError(RuntimeError):
    """Quadrature did not reach the requested tolerance.

    The best estimate and its error bound are kept on the exception so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message: str, estimate: float, abs_error: float):
        super().__init__(message)
        self.estimate = estimate
        self.abs_error = abs_error


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise DomainError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __float__(self) -> float:
        return float(self.value)


def _as_interval(domain) -> Interval:
    if isinstance(domain, Interval):
        return domain
    lo, hi = domain
    return Interval(float(lo), float(hi))


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def _halley(w, y, iterations=12):
    # w*exp(w) - y = 0; exits early once the update stalls
    for _ in range(iterations):
        with np.errstate(all="ignore"):
            ew = np.exp(w)
            f = w * ew - y
            wp1 = w + 1.0
            denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
            step = np.where(denom != 0.0, f / denom, 0.0)
        step = np.where(np.isfinite(step), step, 0.0)
        w = w - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(w))):
            break
    return w


def _w0_guess(y):
    p = np.sqrt(np.clip(2.0 * (math.e * y + 1.0), 0.0, 1.0))
    near_branch = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    with np.errstate(all="ignore"):
        ly = np.log(np.maximum(y, 1e-300))
        big = ly - np.log(np.maximum(ly, 1e-300))
    small = np.log1p(np.maximum(y, -0.3))
    return np.where(y < -0.25, near_branch, np.where(y > 3.0, big, small))


def _wm1_guess(y):
    p = -np.sqrt(np.clip(2.0 * (math.e * y + 1.0), 0.0, 1.0))
    near_branch = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    with np.errstate(all="ignore"):
        l1 = np.log(np.maximum(-y, 1e-300))
        l2 = np.log(np.maximum(-l1, 1e-300))
        asym = l1 - l2 + l2 / l1
    return np.where(y < -0.25, near_branch, asym)


def lambert_w(y, branch: str = "principal"):
    """Real Lambert W function, ``w * exp(w) = y``.

    Parameters
    ----------
    y : float or array_like
        Argument.  ``y >= -1/e`` for the principal branch and
        ``-1/e <= y < 0`` for the ``"minus_one"`` branch.
    branch : {"principal", "minus_one"}
        ``"principal"`` returns the solution ``w >= -1``, ``"minus_one"`` the
        solution ``w <= -1``.

    Returns
    -------
    float or ndarray

    Raises
    ------
    DomainError
        If any argument lies outside the domain of the requested branch.
    """
    scalar = np.ndim(y) == 0
    y = np.asarray(y, dtype=float)
    # tolerate arguments a few ulps below -1/e (rounding of callers)
    y = np.where((y < -_INV_E) & (y > -_INV_E * (1 + 1e-12)), -_INV_E, y)
    if branch == "principal":
        if np.any(~(y >= -_INV_E)):
            raise DomainError("principal branch requires y >= -1/e")
        w = _halley(_w0_guess(y), y)
        w = np.where(y == 0.0, 0.0, w)
        w = np.maximum(w, -1.0)
    elif branch == "minus_one":
        if np.any(~((y >= -_INV_E) & (y < 0.0))):
            raise DomainError("minus_one branch requires -1/e <= y < 0")
        w = _halley(_wm1_guess(y), y)
        w = np.minimum(w, -1.0)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    w = np.where(y == -_INV_E, -1.0, w)
    return float(w) if scalar else w


def _u_minus_log1p(u):
    # u - log1p(u) without cancellation for small u
    u = np.asarray(u, dtype=float)
    small = u < 0.1
    out = np.where(small, 0.0, u - np.log1p(np.where(small, 0.0, u)))
    if np.any(small):
        us = u[small]
        term, acc = us * us, np.zeros_like(us)
        for k in range(2, 30):
            acc += term / k if k % 2 == 0 else -term / k
            term = term * us
        out[small] = acc
    return out


def _branch_offset(e):
    """Solve ``u - log1p(u) = e`` for ``u >= 0`` (so ``w = -1 - u``)."""
    s = np.sqrt(2.0 * e)
    u = s + s * s / 3.0 + 11.0 / 72.0 * s ** 3
    for _ in range(40):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(u > 0, (_u_minus_log1p(u) - e) * (1.0 + u) / u, 0.0)
        u = np.maximum(u - step, 0.0)
        if np.all(np.abs(step) <= 1e-16 * np.maximum(u, 1e-300)):
            break
    return u


def lambert_wm1_from_log(log_neg_y):
    """``W_{-1}(y)`` for ``y = -exp(log_neg_y)``, usable when ``y`` underflows.

    Solves ``w + log(-w) = log_neg_y`` with ``w <= -1`` by Newton iteration;
    near the branch point the equation is rewritten in ``u = -1 - w``.
    Requires ``log_neg_y <= -1``.
    """
    scalar = np.ndim(log_neg_y) == 0
    L = np.asarray(log_neg_y, dtype=float)
    if np.any(~(L <= -1.0 + 1e-12)):
        raise DomainError("minus_one branch requires -1/e <= y < 0")
    near = L > -1.5
    moderate = (L > -600.0) & ~near
    out = np.empty_like(L)
    if np.any(near):
        out[near] = -1.0 - _branch_offset(np.maximum(-(1.0 + L[near]), 0.0))
    if np.any(moderate):
        out[moderate] = lambert_w(-np.exp(np.minimum(L[moderate], -1.0)), "minus_one")
    far = ~moderate & ~near
    if np.any(far):
        Lf = L[far]
        w = Lf - np.log(-Lf)
        for _ in range(50):
            f = w + np.log(-w) - Lf
            step = f / (1.0 + 1.0 / w)
            w = w - step
            if np.all(np.abs(step) <= 1e-15 * np.abs(w)):
                break
        out[far] = w
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Normal and noncentral distributions
# ---------------------------------------------------------------------------

def gaussian_cdf(x):
    """Standard normal distribution function."""
    return _special.ndtr(x)


def gaussian_logcdf(x):
    """Logarithm of the standard normal distribution function, accurate in the lower tail."""
    return _special.log_ndtr(x)


def gaussian_quantile(p):
    """Inverse of :func:`gaussian_cdf`; raises :class:`DomainError` outside (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("quantile requires 0 < p < 1")
    return _special.ndtri(p)


def _check_ncx2(x, df, ncp):
    if df != 1:
        raise DomainError("only one degree of freedom is supported")
    x = np.asarray(x, dtype=float)
    ncp = np.asarray(ncp, dtype=float)
    if np.any(x < 0) or np.any(ncp < 0):
        raise DomainError("noncentral chi-squared requires x >= 0 and ncp >= 0")
    return np.sqrt(x), np.sqrt(ncp)


def noncentral_chisq_cdf(x, df: int = 1, ncp=0.0):
    """``P(chi2_{1, ncp} <= x)`` written through the normal law of ``Z + sqrt(ncp)``."""
    rx, mu = _check_ncx2(x, df, ncp)
    out = _special.ndtr(rx - mu) - _special.ndtr(-rx - mu)
    return np.clip(out, 0.0, 1.0)


def noncentral_chisq_sf(x, df: int = 1, ncp=0.0):
    """Upper tail ``P(chi2_{1, ncp} > x)``, computed without cancellation."""
    rx, mu = _check_ncx2(x, df, ncp)
    out = _special.ndtr(mu - rx) + _special.ndtr(-rx - mu)
    return np.clip(out, 0.0, 1.0)


def noncentral_t_logpdf(t, df, ncp):
    """Log density of the noncentral t distribution.

    With ``T = (Z + ncp) / sqrt(W)``, ``W ~ Gamma(df/2, rate df/2)``, the
    density is ``int sqrt(w) phi(t sqrt(w) - ncp) Gamma(w) dw``.  The integral
    is taken over ``u = log w`` with a trapezoidal rule around the unique
    mode of the integrand, which keeps it accurate for large ``df`` and large
    noncentrality where series-based implementations overflow.  Inputs
    broadcast against each other.
    """
    t, df, ncp = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(df, dtype=float), np.asarray(ncp, dtype=float)
    )
    if np.any(df <= 0):
        raise DomainError("degrees of freedom must be positive")
    shape = t.shape
    t, df, ncp = t.ravel(), df.ravel(), ncp.ravel()
    a = 0.5 * df
    A = a + 0.5
    B = a + 0.5 * t * t
    half_td = 0.5 * t * ncp
    root_d = np.sqrt(half_td * half_td + 4.0 * A * B)
    # positive root of B y^2 - (t ncp / 2) y - A = 0, in the stable form
    y = np.where(half_td >= 0, (half_td + root_d) / (2.0 * B), 2.0 * A / (root_d - half_td))
    mode = 2.0 * np.log(y)
    sd = 1.0 / np.sqrt(A + 0.5 * half_td * y)
    # left tail decays at least like exp(A u); right tail faster than Gaussian
    left = np.minimum(np.maximum(12.0, (2.0 + 60.0 / A) / sd), 4000.0)
    span = float(left.max())
    grid = np.arange(-span, 12.0 + 1e-12, 0.25)
    out = np.empty(t.shape)
    const = a * np.log(a) - _special.gammaln(a) - 0.5 * math.log(2.0 * math.pi)
    for start in range(0, t.size, 512):
        sl = slice(start, start + 512)
        u = mode[sl, None] + sd[sl, None] * grid[None, :]
        v = (A[sl, None] * u - a[sl, None] * np.exp(u)
             - 0.5 * (t[sl, None] * np.exp(0.5 * u) - ncp[sl, None]) ** 2)
        m = v.max(axis=1, keepdims=True)
        w = np.exp(v - m)
        integral = 0.25 * sd[sl] * (w.sum(axis=1) - 0.5 * (w[:, 0] + w[:, -1]))
        out[sl] = const[sl] + m[:, 0] + np.log(integral)
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature and root finding
# ---------------------------------------------------------------------------

def integrate(
    f: Callable[[float], float],
    domain,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
    points: Sequence[float] | None = None,
    limit: int = 500,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod quadrature of a scalar integrand.

    Infinite endpoints are mapped to a finite range internally.  ``points``
    marks interior locations where the integrand changes quickly (only used
    on finite domains).

    Raises
    ------
    NonConvergenceError
        When the error estimate exceeds ``max(abs_tol, rel_tol * |value|)``.
    """
    if rel_tol <= 0 or abs_tol <= 0:
        raise DomainError("tolerances must be positive")
    dom = _as_interval(domain)
    if dom.lo == dom.hi:
        return QuadratureResult(0.0, 0.0, 0)
    kwargs = dict(epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1)
    if points is not None and dom.is_finite:
        inner = sorted(p for p in points if dom.lo < p < dom.hi)
        if inner:
            kwargs["points"] = inner
    out = _integrate.quad(f, dom.lo, dom.hi, **kwargs)
    value, err, info = out[0], out[1], out[2]
    if not (math.isfinite(value) and math.isfinite(err)):
        raise NonConvergenceError("quadrature produced a non-finite result", value, err)
    if err > max(abs_tol, rel_tol * abs(value)):
        raise NonConvergenceError(
            f"quadrature error estimate {err:.3g} exceeds tolerance", value, err
        )
    return QuadratureResult(float(value), float(err), int(info["neval"]))


def find_root(f: Callable[[float], float], bracket, tol: float = 1e-10) -> float:
    """Bracketed root finding (Brent's hybrid bisection / inverse quadratic).

    Raises
    ------
    NoSignChangeError
        If ``f`` has the same strict sign at both ends of the bracket.
    """
    dom = _as_interval(bracket)
    flo, fhi = f(dom.lo), f(dom.hi)
    if flo == 0.0:
        return dom.lo
    if fhi == 0.0:
        return dom.hi
    if flo * fhi > 0:
        raise NoSignChangeError(
            f"no sign change on [{dom.lo}, {dom.hi}]: f = {flo:.3g}, {fhi:.3g}"
        )
    return float(_optimize.brentq(f, dom.lo, dom.hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))
