"""Acceptance checks for the repsuccess package.

Each check returns ``(passed, detail)`` and is timed against its runtime
budget.  Under pytest the summary lines are printed in a separate
"acceptance criteria" section at the end of the run; run this file directly
to print only the summary::

    python3 tests/test_acceptance.py
"""
import csv
import math
import os
import sys
import time
from pathlib import Path
from unittest import mock

import numpy as np
import pytest
from scipy import integrate as _sp_integrate
from scipy import special
from scipy.optimize import brentq

from repsuccess import frequentist
from repsuccess.exact_models import (
    BinomialData,
    SmdData,
    exact_bf0s,
    exact_bfsa,
    exact_replication_bf,
    exact_sceptical_bf,
    logor_posterior_density,
    normal_summary,
    smd_advocacy_density,
)
from repsuccess.frequentist import (
    METHODS,
    d_min_limit,
    information_consistency_check,
    paradox_thresholds,
    success_region,
    type1_error,
)
from repsuccess.io_cli import analyze, bundled_fixture, load_studies, mc_check
from repsuccess.normal_model import (
    ReplicationPair,
    StudySummary,
    bf_0s,
    bf_sa,
    derive_pair,
    min_bf,
    replication_bf,
    sceptical_bf,
    sceptical_z,
    sufficiently_sceptical_g,
    z_from_min_bf,
    z_gamma,
)
from repsuccess.numerics import gaussian_quantile, noncentral_t_logpdf

TABLE = Path(__file__).parent / "data" / "published_table.csv"
TABLE_COLUMNS = ("c", "d", "Q", "minbf_o", "minbf_r", "p_s", "bf_s", "bf_r")
SEED = 20211


def _sig2(x: float) -> str:
    return f"{x:.2g}"


# ---------------------------------------------------------------------------
# The checks
# ---------------------------------------------------------------------------

def worked_example():
    pair = ReplicationPair.from_z(3.0, 2.5, 1.0)
    got = {}
    for label, gamma in (("1/10", 1 / 10), ("1/3", 1 / 3)):
        g = sufficiently_sceptical_g(pair.z_o, gamma)
        got[f"g_{label}"] = _sig2(g)
        got[f"bf_sa_{label}"] = bf_sa(pair, g).format()
    got["minbf_o"] = min_bf(pair.z_o).format()
    got["minbf_r"] = min_bf(pair.z_r).format()
    got["d"] = _sig2(pair.d)
    want = {"g_1/10": "1.6", "bf_sa_1/10": "1/3.5", "g_1/3": "0.4", "bf_sa_1/3": "1/7.4",
            "minbf_o": "1/18", "minbf_r": "1/5.5", "d": "0.83"}
    bad = {k: (got[k], want[k]) for k in want if got[k] != want[k]}
    if not bad:
        return True, "all 7 values match"
    return False, f"{7 - len(bad)}/7 match; computed vs published {bad}"


def table_reproduction():
    records = load_studies(bundled_fixture())
    # exact columns are only computable for records with raw SMD or count data
    rows = {r.id: r for r in analyze(records, exact=True)}
    with open(TABLE, newline="", encoding="utf-8") as fh:
        published = list(csv.DictReader(fh))
    mismatches = []
    for ref in published:
        row = rows.get(ref["id"])
        if row is None:
            mismatches.append((ref["id"], "missing"))
            continue
        for col in TABLE_COLUMNS:
            if getattr(row, col) != ref[col]:
                mismatches.append((ref["id"], col, getattr(row, col), ref[col]))
    exact_rows = [r for r in records if r.kind in ("smd", "binomial")]
    for rec in exact_rows:
        ref = next(p for p in published if p["id"] == rec.id)
        for col in ("bf_s_exact", "bf_r_exact"):
            if getattr(rows[rec.id], col) != ref[col]:
                mismatches.append((rec.id, col, getattr(rows[rec.id], col), ref[col]))
    n_empty = sum(not r.bf_s_exists for r in rows.values())
    ok = len(published) == 21 and len(rows) == 21 and not mismatches and n_empty == 7
    detail = (f"{len(published)} rows x {len(TABLE_COLUMNS)} columns, {len(mismatches)} mismatches, "
              f"{n_empty} empty BF_S cells; exact columns checked on {len(exact_rows)} rows "
              "(the fixture holds correlations only)")
    if n_empty != 7:
        detail += "; empty BF_S rows: " + ", ".join(r.id for r in rows.values() if not r.bf_s_exists)
    if mismatches:
        detail += f"; first: {mismatches[:3]}"
    return ok, detail


def cross_method_example():
    pair = ReplicationPair.from_z(z_from_min_bf(1 / 2), z_from_min_bf(1 / 1.5), 1.0)
    got = sceptical_bf(pair).format()
    return got == "1/1.9", f"BF_S = {got}"


def sceptical_p_dmin():
    z_o, c, alpha = 2.0, 2.0, 0.025
    d_min = success_region("sceptical_p", z_o, c, 1 / 3, alpha=alpha).d_min
    # oracle: the replication z at which the sceptical z reaches the alpha quantile
    target = float(gaussian_quantile(1 - alpha))
    z_r = brentq(lambda zr: sceptical_z(z_o, zr, c) - target, target, 100.0, xtol=1e-14, rtol=1e-15)
    oracle = z_r / (z_o * math.sqrt(c))
    ok = abs(d_min - 4.87) <= 0.01 and abs(d_min - oracle) <= 1e-9
    return ok, f"d_min = {d_min:.4f} (root-finding oracle {oracle:.4f})"


def paradox():
    z_o = z_from_min_bf(1 / 10)
    plain = paradox_thresholds(z_o, 1.0, 1 / 3)
    trunc = paradox_thresholds(z_o, 1.0, 1 / 3, truncate=True)
    ok = (plain["sceptical_bf"] is not None and abs(plain["sceptical_bf"] + 7.09) <= 0.01
          and plain["replication_bf"] is not None and abs(plain["replication_bf"] + 2.66) <= 0.01
          and trunc["sceptical_bf"] is None and trunc["replication_bf"] is None)
    return ok, (f"sceptical BF {plain['sceptical_bf']:.4f}, replication BF {plain['replication_bf']:.4f}; "
                f"truncated {trunc['sceptical_bf']}, {trunc['replication_bf']}")


def closed_form_vs_search():
    rng = np.random.default_rng(SEED)
    zs = rng.uniform(1.1, 6.0, 200)
    ds = rng.uniform(-3.0, 3.0, 200)
    worst, disagree, both = 0.0, 0, 0
    for z, d in zip(zs, ds):
        pair = ReplicationPair.from_relative(float(z), float(d), 1.0)
        a = sceptical_bf(pair, method="closed_form")
        b = sceptical_bf(pair, method="search")
        if a.exists != b.exists:
            disagree += 1
        elif a.exists:
            both += 1
            worst = max(worst, abs(a.log_bf - b.log_bf) / max(abs(b.log_bf), 1e-300))
    ok = disagree == 0 and worst <= 1e-8
    return ok, f"{both} points with BF_S, max rel diff {worst:.1e}, {disagree} existence disagreements"


def frequentist_oracle():
    results = mc_check(n_sims=1_000_000, seed=SEED, tolerance=3.0, workers=os.cpu_count() or 1)
    worst = 0.0
    for r in results:
        ref_se = math.sqrt(r["analytic"] * (1 - r["analytic"]) / 1e6)
        if ref_se > 0:
            worst = max(worst, abs(r["monte_carlo"] - r["analytic"]) / ref_se)
    n_ok = sum(r["passed"] for r in results)
    # the two-trials rate must come from its closed form, never from quadrature
    exact_ok = True
    with mock.patch.object(frequentist, "integrate", side_effect=AssertionError("quadrature used")):
        for gamma in (1 / 3, 1 / 10):
            for c in (0.5, 1.0, 2.0, 4.0):
                p = type1_error("two_trials", gamma, c).probability
                ref = 2.0 * (0.5 * math.erfc(z_gamma(gamma) / math.sqrt(2.0))) ** 2
                exact_ok &= math.isclose(p, ref, rel_tol=1e-14)
    ok = n_ok == len(results) == 96 and exact_ok
    return ok, (f"{n_ok}/{len(results)} within 3 SE (max {worst:.2f} SE); "
                f"two-trials T1E closed form {'ok' if exact_ok else 'WRONG'}")


def t1e_monotone():
    cs = (0.5, 1.0, 2.0, 4.0, 8.0)
    problems = []
    for gamma in (1 / 3, 1 / 10):
        for method in ("sceptical_bf", "sceptical_p"):
            rates = [type1_error(method, gamma, c).probability for c in cs]
            if not all(a > b for a, b in zip(rates, rates[1:])):
                problems.append((method, gamma, rates))
        tt = [type1_error("two_trials", gamma, c).probability for c in cs]
        if len(set(tt)) != 1:
            problems.append(("two_trials", gamma, tt))
    return not problems, "strictly decreasing / constant as expected" if not problems else f"{problems}"


def information_consistency():
    grid = np.linspace(2.0, 40.0, 77)
    notes, ok = [], True

    def path(d):
        return [sceptical_bf(ReplicationPair.from_relative(float(z), d, 1.0)) for z in grid]

    for d in (1.0, 0.5):
        vals = [b.log_bf for b in path(d) if b.exists]
        tail = vals[len(vals) // 2:]
        good = vals and math.exp(vals[-1]) < 1e-6 and all(a > b for a, b in zip(tail, tail[1:]))
        ok &= bool(good)
        notes.append(f"d={d:g}: BF_S at z_o=40 is {math.exp(vals[-1]):.1e}")
    low = path(0.3)
    bound_ok = all(b.log_bf >= min_bf(float(z)).log_bf and b.value >= 1e-6
                   for z, b in zip(grid, low) if b.exists)
    cls = information_consistency_check(0.3, grid)
    ok &= bound_ok and cls == "bounded_away"
    notes.append(f"d=0.3: {sum(b.exists for b in low)} grid points with success, class {cls}")
    threshold = math.sqrt(2.0) - 1.0
    for d in (0.35, 0.40, 0.43, 0.48):
        cls = information_consistency_check(d, grid)
        want = "diverges_to_zero" if d > threshold else "bounded_away"
        ok &= cls == want
        notes.append(f"d={d:.2f}: {cls}")
    return ok, "; ".join(notes)


def shrinkage_limits():
    gamma, z_fixed, c_fixed = 1 / 3, 3.0, 1.0
    failures, limits = [], {}
    for m in METHODS:
        for kind, numeric, lim in (
            ("c", success_region(m, z_fixed, 1e6, gamma).d_min,
             d_min_limit(m, "c_to_infinity", gamma, z_o=z_fixed)),
            ("z_o^2", success_region(m, 100.0, c_fixed, gamma).d_min,
             d_min_limit(m, "zo2_to_infinity", gamma, c=c_fixed)),
        ):
            limits[(m, kind)] = lim
            if abs(numeric - lim) > 1e-3:
                failures.append(f"{m} {kind}-limit {lim:.4g} vs d_min {numeric:.4g}")
    signs = {
        ("two_trials", "c"): False, ("two_trials", "z_o^2"): False,
        ("sceptical_bf", "c"): True, ("sceptical_bf", "z_o^2"): True,
        ("replication_bf", "c"): False, ("replication_bf", "z_o^2"): True,
        ("sceptical_p", "c"): True, ("sceptical_p", "z_o^2"): False,
    }
    for key, positive in signs.items():
        if (limits[key] > 0) != positive:
            failures.append(f"{key[0]} {key[1]}-limit has the wrong sign")
    detail = "8 limits matched" if not failures else f"{len(failures)} sub-checks fail: " + "; ".join(failures)
    return not failures, detail


def _simulate_pair(model, rng, n=500, z_target=3.0, max_draws=50):
    """First simulated original/replication pair for which all four Bayes factors exist."""
    se_design = math.sqrt(2.0 / n) if model == "smd" else math.sqrt(2.0 / (n * 0.35 * 0.65))
    effect = z_target * se_design

    def draw():
        if model == "smd":
            x = rng.normal(effect, 1.0, n)
            y = rng.normal(0.0, 1.0, n)
            sp = math.sqrt(0.5 * (x.var(ddof=1) + y.var(ddof=1)))
            return SmdData(float((x.mean() - y.mean()) / (sp * math.sqrt(2.0 / n))), n, n)
        p1 = special.expit(special.logit(0.35) + effect)
        return BinomialData(int(rng.binomial(n, p1)), n, int(rng.binomial(n, 0.35)), n)

    for _ in range(max_draws):
        orig, rep = draw(), draw()
        pair = derive_pair(StudySummary(*normal_summary(orig)), StudySummary(*normal_summary(rep)))
        if sufficiently_sceptical_g(pair.z_o, 1 / 10) is not None and sceptical_bf(pair).exists:
            return orig, rep, pair
    raise RuntimeError("no usable simulated pair")


def exact_asymptotics():
    rng = np.random.default_rng(SEED)
    notes, ok = [], True
    for model in ("smd", "logor"):
        orig, rep, pair = _simulate_pair(model, rng)
        g = sufficiently_sceptical_g(pair.z_o, 1 / 10)
        tau2 = g * normal_summary(orig)[1] ** 2
        kinds = {
            "BF_0S": (exact_bf0s(model, orig, tau2), bf_0s(pair.z_o, g)),
            "BF_SA": (exact_bfsa(model, rep, orig, tau2), bf_sa(pair, g)),
            "BF_R": (exact_replication_bf(model, orig, rep), replication_bf(pair)),
            "BF_S": (exact_sceptical_bf(model, orig, rep), sceptical_bf(pair)),
        }
        errs = {}
        for name, (e, n_) in kinds.items():
            errs[name] = abs(e.log_bf - n_.log_bf) / abs(n_.log_bf) if e.exists else math.inf
        ok &= max(errs.values()) <= 0.02
        notes.append(f"{model} (z_o={pair.z_o:.2f}) max rel err {max(errs.values()):.4f}")

        est, se = normal_summary(orig)
        pts = [est - 3 * se, est, est + 3 * se]
        lo, hi = est - 40 * se, est + 40 * se
        masses = []
        if model == "smd":
            masses.append(_mass(lambda t: smd_advocacy_density(t, orig), lo, hi, pts))
            for data in (orig, rep):
                ncp = pair.z_o if data is orig else pair.z_r
                masses.append(_mass(lambda t: math.exp(float(noncentral_t_logpdf(t, data.nu, ncp))),
                                    data.t_stat - 40, data.t_stat + 40, [data.t_stat]))
        else:
            for method in ("hypergeometric", "quadrature"):
                masses.append(_mass(lambda t: logor_posterior_density(t, orig, method=method), lo, hi, pts))
        worst = max(abs(m - 1.0) for m in masses)
        ok &= worst <= 1e-5
        notes.append(f"{len(masses)} densities within {worst:.1e} of 1")
    return ok, "; ".join(notes)


def _mass(f, lo, hi, points):
    return _sp_integrate.quad(f, lo, hi, points=points, epsabs=0, epsrel=1e-10, limit=400)[0]


# number, label, check, runtime budget in seconds (None: no budget)
CRITERIA = [
    (1, "worked example", worked_example, 1.0),
    (2, "published table", table_reproduction, 60.0),
    (3, "cross-method example", cross_method_example, None),
    (4, "sceptical p d_min", sceptical_p_dmin, None),
    (5, "replication paradox", paradox, None),
    (6, "closed form vs search", closed_form_vs_search, None),
    (7, "Monte Carlo oracle", frequentist_oracle, 300.0),
    (8, "T1E monotonicity", t1e_monotone, None),
    (9, "information consistency", information_consistency, None),
    (10, "shrinkage limits", shrinkage_limits, None),
    (11, "exact asymptotics", exact_asymptotics, None),
]


def run_criterion(number):
    _, label, check, budget = next(c for c in CRITERIA if c[0] == number)
    start = time.perf_counter()
    passed, detail = check()
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed >= budget:
        passed = False
        detail += f"; over the {budget:g} s budget"
    line = f"[{number:2d}] {'PASS' if passed else 'FAIL'}  {label} ({elapsed:.2f} s): {detail}"
    return passed, line


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_criterion(number, acceptance_log):
    passed, line = run_criterion(number)
    acceptance_log[number] = line
    assert passed, line


if __name__ == "__main__":
    failed = 0
    for number, *_ in CRITERIA:
        passed, line = run_criterion(number)
        failed += not passed
        print(line, flush=True)
    sys.exit(1 if failed else 0)
