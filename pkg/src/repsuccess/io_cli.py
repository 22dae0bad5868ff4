"""Study files, batch analysis, curve tables and the ``repsuccess`` command.

Input files are UTF-8 CSV with a header row.  The record kind is inferred
from the header:

==============  ==========================================================
kind            columns
==============  ==========================================================
correlation     id, r_o, n_o, r_r, n_r
summary         id, est_o, se_o, est_r, se_r
smd             id, t_o, n1_o, n2_o, t_r, n1_r, n2_r, paired
binomial        id, x1_o, n1_o, x2_o, n2_o, x1_r, n1_r, x2_r, n2_r
==============  ==========================================================

Lines starting with ``#`` and blank lines are skipped.  Rows that fail to
parse or violate a domain constraint are reported as diagnostics with their
line number and do not stop the remaining rows from loading.

Command line::

    repsuccess analyze [FILE] [--gamma G] [--truncate] [--exact]
    repsuccess curves {success_region,power,t1e,bf_vs_g} [...]
    repsuccess power --zo 2 2.5 3 --c 1 2
    repsuccess t1e --c 0.5 1 2 4
    repsuccess mc-check --seed 1 --n-sims 100000

Exit status is 0 on success, 1 when a file cannot be read or written and 2
on invalid input (bad arguments, malformed header, row diagnostics, or a
failed Monte Carlo check).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from importlib import resources

import numpy as np

from .exact_models import (
    BinomialData,
    SmdData,
    exact_replication_bf,
    exact_sceptical_bf,
    normal_summary,
)
from .frequentist import (
    METHODS,
    SamplingHypothesis,
    monte_carlo_rate,
    prob_success,
    success_region,
    type1_error,
)
from .normal_model import (
    DegenerateError,
    StudySummary,
    bf_0s,
    bf_sa,
    derive_pair,
    format_p,
    g_min_bf,
    min_bf,
    q_statistic,
    replication_bf,
    sceptical_bf,
    sceptical_p,
    sufficiently_sceptical_g,
    z_from_min_bf,
)
from .numerics import DomainError

__all__ = [
    "HeaderError",
    "RowDiagnostic",
    "StudyRecord",
    "LoadedStudies",
    "AnalysisRow",
    "fisher_transform",
    "load_studies",
    "bundled_fixture",
    "analyze",
    "write_rows",
    "read_rows",
    "emit_curves",
    "main",
]

SCHEMAS = {
    "correlation": ("id", "r_o", "n_o", "r_r", "n_r"),
    "summary": ("id", "est_o", "se_o", "est_r", "se_r"),
    "smd": ("id", "t_o", "n1_o", "n2_o", "t_r", "n1_r", "n2_r", "paired"),
    "binomial": ("id", "x1_o", "n1_o", "x2_o", "n2_o", "x1_r", "n1_r", "x2_r", "n2_r"),
}

_EXACT_MODEL = {"smd": "smd", "binomial": "logor"}

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f", ""}


class HeaderError(ValueError):
    """The header row is missing or does not match any known schema."""


@dataclass(frozen=True)
class RowDiagnostic:
    line: int
    id: str
    message: str

    def __str__(self):
        label = f" ({self.id})" if self.id else ""
        return f"line {self.line}{label}: {self.message}"


@dataclass(frozen=True)
class StudyRecord:
    """One original/replication pair.

    ``original`` and ``replication`` are :class:`StudySummary` objects for
    the correlation and summary kinds and :class:`SmdData` or
    :class:`BinomialData` for the exact kinds.
    """

    id: str
    kind: str
    original: object
    replication: object
    line: int = 0

    def summaries(self) -> tuple[StudySummary, StudySummary]:
        if self.kind in _EXACT_MODEL:
            return (StudySummary(*normal_summary(self.original)),
                    StudySummary(*normal_summary(self.replication)))
        return self.original, self.replication


class LoadedStudies(list):
    """List of :class:`StudyRecord` with row diagnostics attached."""

    def __init__(self, records=(), kind=None, diagnostics=()):
        super().__init__(records)
        self.kind = kind
        self.diagnostics = list(diagnostics)


def fisher_transform(r: float, n: int) -> tuple[float, float]:
    """Fisher z-transform of a correlation and its approximate standard error.

    Returns ``(atanh(r), 1 / sqrt(n - 3))``.
    """
    r = float(r)
    if not abs(r) < 1.0:
        raise DomainError(f"correlation must satisfy |r| < 1, got {r}")
    if n != int(n) or n < 4:
        raise DomainError(f"sample size must be an integer >= 4, got {n}")
    return math.atanh(r), 1.0 / math.sqrt(int(n) - 3)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _detect_kind(header):
    names = [h.strip() for h in header]
    for kind, cols in SCHEMAS.items():
        if sorted(names) == sorted(cols):
            return kind, names
    raise HeaderError(
        "header does not match any schema: "
        + ", ".join(f"{k}({', '.join(v)})" for k, v in SCHEMAS.items())
    )


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _bool(text):
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"expected a boolean flag, got {text!r}")


def _build(kind, row, line):
    sid = row["id"]
    if kind == "correlation":
        o = StudySummary(*fisher_transform(float(row["r_o"]), _int(row["n_o"])))
        r = StudySummary(*fisher_transform(float(row["r_r"]), _int(row["n_r"])))
    elif kind == "summary":
        o = StudySummary(float(row["est_o"]), float(row["se_o"]))
        r = StudySummary(float(row["est_r"]), float(row["se_r"]))
    elif kind == "smd":
        paired = _bool(row["paired"])

        def smd(t, n1, n2):
            n2 = None if paired else _int(row[n2])
            return SmdData(float(row[t]), _int(row[n1]), n2, paired)

        o = smd("t_o", "n1_o", "n2_o")
        r = smd("t_r", "n1_r", "n2_r")
    else:
        o = BinomialData(_int(row["x1_o"]), _int(row["n1_o"]), _int(row["x2_o"]), _int(row["n2_o"]))
        r = BinomialData(_int(row["x1_r"]), _int(row["n1_r"]), _int(row["x2_r"]), _int(row["n2_r"]))
    return StudyRecord(sid, kind, o, r, line)


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.strip() and not raw.lstrip().startswith("#"):
            yield lineno, raw


def parse_studies(text: str) -> LoadedStudies:
    """Parse CSV text; see :func:`load_studies`."""
    lines = list(_content_lines(text))
    if not lines:
        raise HeaderError("file has no header row")
    header = next(csv.reader([lines[0][1]]))
    kind, names = _detect_kind(header)
    id_pos = names.index("id")
    records, diags = [], []
    for (lineno, _), cells in zip(lines[1:], csv.reader([t for _, t in lines[1:]])):
        sid = cells[id_pos].strip() if len(cells) > id_pos else ""
        if len(cells) != len(names):
            diags.append(RowDiagnostic(lineno, sid, f"expected {len(names)} fields, found {len(cells)}"))
            continue
        row = {k: v.strip() for k, v in zip(names, cells)}
        try:
            records.append(_build(kind, row, lineno))
        except (ValueError, TypeError) as exc:
            diags.append(RowDiagnostic(lineno, sid, str(exc)))
    return LoadedStudies(records, kind, diags)


def load_studies(path, format: str = "csv") -> LoadedStudies:
    """Read study records from a CSV file.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV file with a header row matching one of ``SCHEMAS``.
    format : {"csv"}

    Returns
    -------
    LoadedStudies
        The valid records in file order.  ``.diagnostics`` lists the
        rejected rows with line numbers and ``.kind`` the detected schema.

    Raises
    ------
    HeaderError
        If the header is missing or unrecognised.
    OSError
        If the file cannot be read.
    """
    if format != "csv":
        raise ValueError(f"unsupported input format {format!r}")
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_studies(fh.read())


def bundled_fixture():
    """Path-like handle to the packaged SSRP correlation records."""
    return resources.files("repsuccess") / "data" / "ssrp_correlations.csv"


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisRow:
    """Displayed results for one study pair.

    Bayes factors use the ``1/x`` convention and saturate at
    ``"< 1/1000"`` and ``"> 1000"``; an empty string marks a value that
    does not exist or was not computed.  ``g_gamma`` and ``bf_sa_gamma``
    report the sufficiently sceptical prior at the analysis level and the
    sceptic-versus-advocate Bayes factor under it.
    """

    id: str
    c: str = ""
    d: str = ""
    Q: str = ""
    minbf_o: str = ""
    minbf_r: str = ""
    p_s: str = ""
    bf_s: str = ""
    bf_s_exact: str = ""
    bf_r: str = ""
    bf_r_exact: str = ""
    g_gamma: str = ""
    bf_sa_gamma: str = ""
    bf_s_exists: bool = False
    bf_s_exact_exists: bool = False
    error: str = ""


def _fixed(x, digits=2):
    return f"{x:.{digits}f}"


def _analyze_one(record: StudyRecord, gamma: float, truncate: bool, exact: bool) -> AnalysisRow:
    try:
        pair = derive_pair(*record.summaries())
    except (DegenerateError, DomainError) as exc:
        return AnalysisRow(record.id, error=str(exc))
    bfs = sceptical_bf(pair, truncate=truncate)
    g = sufficiently_sceptical_g(pair.z_o, gamma)
    out = dict(
        c=_fixed(pair.c),
        d=_fixed(pair.d),
        Q=_fixed(q_statistic(pair)),
        minbf_o=min_bf(pair.z_o).format(),
        minbf_r=min_bf(pair.z_r).format(),
        p_s=format_p(sceptical_p(pair, recalibrate=True)),
        bf_s=bfs.format(),
        bf_r=replication_bf(pair, truncate=truncate).format(),
        g_gamma="" if g is None else f"{g:.2g}",
        bf_sa_gamma="" if g is None else bf_sa(pair, g).format(),
        bf_s_exists=bfs.exists,
    )
    if exact and record.kind in _EXACT_MODEL:
        model = _EXACT_MODEL[record.kind]
        try:
            ebfs = exact_sceptical_bf(model, record.original, record.replication)
            out.update(
                bf_s_exact=ebfs.format(),
                bf_s_exact_exists=ebfs.exists,
                bf_r_exact=exact_replication_bf(model, record.original, record.replication).format(),
            )
        except (ArithmeticError, ValueError) as exc:
            out["error"] = f"exact computation failed: {exc}"
    return AnalysisRow(record.id, **out)


def analyze(records, gamma: float = 1 / 3, truncate: bool = False, exact: bool = False,
            workers: int = 1) -> list[AnalysisRow]:
    """Compute the results-table columns for each record.

    Parameters
    ----------
    records : iterable of StudyRecord
    gamma : float
        Level for the ``g_gamma`` and ``bf_sa_gamma`` diagnostics.
    truncate : bool
        Use the one-sided (truncated advocacy prior) Bayes factors.
    exact : bool
        Also compute exact-likelihood BF_S and BF_R for smd and binomial
        records.
    workers : int
        Rows are independent; with ``workers > 1`` they run on a thread
        pool.  Output order always follows input order.

    Returns
    -------
    list of AnalysisRow
        Rows that cannot be computed (e.g. a zero original estimate) carry
        a message in ``error`` and empty cells.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError("level gamma must lie in (0, 1)")
    records = list(records)

    def job(rec):
        return _analyze_one(rec, gamma, truncate, exact)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, records))
    return [job(r) for r in records]


_ROW_FIELDS = [f.name for f in fields(AnalysisRow)]
_BOOL_FIELDS = {f.name for f in fields(AnalysisRow) if f.type in ("bool", bool)}


def _rows_to_text(rows, format):
    if format == "json":
        return json.dumps([asdict(r) for r in rows], indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_ROW_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (str(v).lower() if isinstance(v, bool) else v) for k, v in asdict(r).items()})
    return buf.getvalue()


def write_rows(rows, sink, format: str = "csv") -> None:
    """Write analysis rows to a path (``"-"`` for standard output) as CSV or JSON."""
    _write_text(_rows_to_text(rows, format), sink)


def read_rows(path, format: str = "csv") -> list[AnalysisRow]:
    """Read rows written by :func:`write_rows`."""
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if format == "json":
        return [AnalysisRow(**item) for item in json.loads(text)]
    rows = []
    for item in csv.DictReader(io.StringIO(text)):
        for k in _BOOL_FIELDS:
            item[k] = item[k] == "true"
        rows.append(AnalysisRow(**item))
    return rows


def _write_text(text, sink):
    if sink in (None, "-"):
        sys.stdout.write(text)
        return
    with open(sink, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

CURVE_KINDS = ("success_region", "power", "t1e", "bf_vs_g")

_CURVE_DEFAULTS = {
    "bf_vs_g": {"z_o": [2.0, 3.0, 4.0], "g_min": 1e-2, "g_max": 1e3, "points": 241},
    "success_region": {"methods": list(METHODS), "gamma": 1 / 3, "c": 1.0,
                       "minbf_min": 1e-4, "minbf_max": 0.9, "points": 200},
    "power": {"methods": list(METHODS), "gamma": 1 / 3, "c": [1.0, 2.0],
              "hypothesis": "conditional", "z_min": 1.0, "z_max": 5.0, "points": 81},
    "t1e": {"methods": list(METHODS), "gamma": [1 / 3, 1 / 10],
            "c_min": 0.5, "c_max": 8.0, "points": 17},
}


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple, np.ndarray)) else [x]


def _curve_bf_vs_g(p):
    g = np.logspace(math.log10(p["g_min"]), math.log10(p["g_max"]), int(p["points"]))
    rows = []
    for z in _as_list(p["z_o"]):
        gm = g_min_bf(z)
        grid = np.unique(np.append(g, gm)) if gm > 0 else g
        label = f"z_o={z:g}"
        rows += [(label, float(x), bf_0s(z, float(x)).value) for x in grid]
        rows.append((f"minimum:{label}", gm, min_bf(z).value))
    return rows


def _curve_success_region(p):
    # x is the minimum Bayes factor of the original study, y the smallest
    # positive relative effect estimate giving success (empty when none)
    xs = np.logspace(math.log10(p["minbf_min"]), math.log10(p["minbf_max"]), int(p["points"]))
    rows = []
    for method in _as_list(p["methods"]):
        for x in xs:
            region = success_region(method, z_from_min_bf(float(x)), float(p["c"]), float(p["gamma"]))
            dmin = region.d_min
            rows.append((method, float(x), math.nan if dmin is None else dmin))
    return rows


def _curve_power(p):
    zs = np.linspace(p["z_min"], p["z_max"], int(p["points"]))
    rows = []
    for method in _as_list(p["methods"]):
        for c in _as_list(p["c"]):
            for z in zs:
                hyp = getattr(SamplingHypothesis, p["hypothesis"])(float(z), float(c))
                rows.append((f"{method}:c={c:g}", float(z),
                             prob_success(method, float(z), float(c), float(p["gamma"]), hyp).probability))
    return rows


def _curve_t1e(p):
    cs = np.logspace(math.log10(p["c_min"]), math.log10(p["c_max"]), int(p["points"]))
    rows = []
    for method in _as_list(p["methods"]):
        for gamma in _as_list(p["gamma"]):
            label = f"{method}:gamma={Fraction(gamma).limit_denominator(1000)}"
            rows += [(label, float(c), type1_error(method, float(gamma), float(c)).probability) for c in cs]
    return rows


_CURVES = {
    "bf_vs_g": _curve_bf_vs_g,
    "success_region": _curve_success_region,
    "power": _curve_power,
    "t1e": _curve_t1e,
}


def curve_rows(kind: str, params: dict | None = None) -> list[tuple[str, float, float]]:
    """Long-format ``(series, x, y)`` tuples for one curve family; ``y`` may be ``nan``."""
    if kind not in _CURVES:
        raise ValueError(f"unknown curve kind {kind!r}; choose from {', '.join(CURVE_KINDS)}")
    p = dict(_CURVE_DEFAULTS[kind])
    unknown = set(params or {}) - set(p)
    if unknown:
        raise ValueError(f"unknown parameters for {kind}: {', '.join(sorted(unknown))}")
    p.update(params or {})
    if int(p.get("points", 1)) < 1 or any(len(_as_list(v)) == 0 for v in p.values()):
        raise ValueError("parameter grid is empty")
    return _CURVES[kind](p)


def _cell(y):
    return "" if not math.isfinite(y) else y


def emit_curves(kind: str, params: dict | None, sink, format: str = "csv") -> None:
    """Write a curve family as a long table with columns ``series, x, y``.

    Numbers are written with ``repr`` so identical parameters give
    byte-identical files.  Missing values (no success region, say) are
    empty strings.

    Parameters
    ----------
    kind : {"success_region", "power", "t1e", "bf_vs_g"}
        ``bf_vs_g``: sceptical Bayes factor ``bf_0s`` against ``g`` per
        ``z_o``, plus one ``minimum:`` point per curve.
        ``success_region``: smallest positive ``d`` giving success against
        the original minimum Bayes factor, per method.
        ``power``: success probability against ``z_o`` per method and ``c``.
        ``t1e``: type I error rate against ``c`` per method and level.
    params : dict or None
        Overrides for the defaults in ``_CURVE_DEFAULTS[kind]``.
    sink : path or "-"
    format : {"csv", "json"}
    """
    rows = curve_rows(kind, params)
    if format == "json":
        payload = [{"series": s, "x": x, "y": _cell(y)} for s, x, y in rows]
        text = json.dumps(payload) + "\n"
    elif format == "csv":
        buf = io.StringIO()
        buf.write("series,x,y\n")
        for s, x, y in rows:
            buf.write(f"{s},{x!r},{_cell(y)!r}\n" if math.isfinite(y) else f"{s},{x!r},\n")
        text = buf.getvalue()
    else:
        raise ValueError(f"unsupported format {format!r}")
    _write_text(text, sink)


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def _level(text):
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid level {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return value


def _positive(text):
    value = float(Fraction(text))
    if not value > 0:
        raise argparse.ArgumentTypeError("value must be positive")
    return value


def _table_text(header, rows, format):
    if format == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cmd_analyze(args):
    source = args.input if args.input else bundled_fixture()
    studies = load_studies(source)
    for diag in studies.diagnostics:
        print(f"warning: {diag}", file=sys.stderr)
    rows = analyze(studies, gamma=args.gamma, truncate=args.truncate, exact=args.exact,
                   workers=args.workers)
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"warning: {r.id}: {r.error}", file=sys.stderr)
    write_rows(rows, args.out, args.format)
    return 2 if studies.diagnostics or failed else 0


def _cmd_curves(args):
    params = {}
    if args.zo:
        params["z_o"] = args.zo
    if args.c:
        params["c"] = args.c if args.kind == "power" else args.c[0]
    if args.kind in ("success_region", "power", "t1e"):
        if args.methods:
            params["methods"] = args.methods
        if args.gamma is not None:
            params["gamma"] = args.gamma
    if args.hypothesis:
        params["hypothesis"] = args.hypothesis
    if args.points:
        params["points"] = args.points
    emit_curves(args.kind, params, args.out, args.format)
    return 0


def _cmd_power(args):
    gamma = 1 / 3 if args.gamma is None else args.gamma
    rows = []
    for method in args.methods or METHODS:
        for c in args.c:
            for z in args.zo:
                hyp = getattr(SamplingHypothesis, args.hypothesis)(z, c)
                p = prob_success(method, z, c, gamma, hyp, alpha=args.alpha).probability
                rows.append([method, args.hypothesis, z, c, gamma, p])
    header = ["method", "hypothesis", "z_o", "c", "gamma", "power"]
    _write_text(_table_text(header, rows, args.format), args.out)
    return 0


def _cmd_t1e(args):
    gamma = 1 / 3 if args.gamma is None else args.gamma
    rows = []
    for method in args.methods or METHODS:
        for c in args.c:
            p = type1_error(method, gamma, c, alpha=args.alpha).probability
            rows.append([method, c, gamma, p])
    _write_text(_table_text(["method", "c", "gamma", "t1e"], rows, args.format), args.out)
    return 0


def mc_check(methods=METHODS, gammas=(1 / 3, 1 / 10), cs=(0.5, 1.0, 2.0, 4.0), z_o=2.5,
             n_sims=1_000_000, seed=20211, tolerance=3.0, workers=1):
    """Compare analytic success rates with simulation for every combination.

    Returns a list of dicts with the analytic and simulated rates, the
    Monte Carlo standard error and whether they agree within ``tolerance``
    binomial standard errors evaluated at the analytic rate.  The null truth is compared with :func:`type1_error`,
    the conditional and predictive truths (at ``z_o``) with
    :func:`prob_success`.  The same ``seed`` is used for every combination.
    """
    out = []
    for method in methods:
        for gamma in gammas:
            for c in cs:
                for truth in ("null", "conditional", "predictive"):
                    if truth == "null":
                        analytic = type1_error(method, gamma, c).probability
                    else:
                        hyp = getattr(SamplingHypothesis, truth)(z_o, c)
                        analytic = prob_success(method, z_o, c, gamma, hyp).probability
                    mc = monte_carlo_rate(method, gamma, c, truth, n_sims, seed,
                                          z_o=None if truth == "null" else z_o, workers=workers)
                    se = mc.mc_std_error
                    diff = abs(mc.probability - analytic)
                    # judge against the spread implied by the analytic rate so that a
                    # rare event with no hits is not given zero variance
                    ref_se = math.sqrt(analytic * (1.0 - analytic) / n_sims)
                    ok = diff <= tolerance * ref_se if ref_se > 0 else diff == 0.0
                    out.append(dict(method=method, gamma=gamma, c=c, truth=truth, analytic=analytic,
                                    monte_carlo=mc.probability, mc_se=se, passed=ok))
    return out


def _cmd_mc_check(args):
    gammas = [args.gamma] if args.gamma is not None else [1 / 3, 1 / 10]
    results = mc_check(methods=args.methods or METHODS, gammas=gammas, cs=args.c,
                       z_o=args.zo[0] if args.zo else 2.5, n_sims=args.n_sims, seed=args.seed,
                       tolerance=args.tolerance, workers=args.workers)
    header = ["method", "gamma", "c", "truth", "analytic", "monte_carlo", "mc_se", "passed"]
    rows = [[r[k] for k in header] for r in results]
    _write_text(_table_text(header, rows, args.format), args.out)
    n_fail = sum(not r["passed"] for r in results)
    if n_fail:
        print(f"{n_fail} of {len(results)} checks outside {args.tolerance:g} standard errors",
              file=sys.stderr)
    return 2 if n_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repsuccess",
        description="Replication success with sceptical Bayes factors and related methods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, gamma_default=None):
        p.add_argument("--gamma", type=_level, default=gamma_default,
                       help="level gamma, e.g. 1/3 or 0.1")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default="-", help="output file (default: standard output)")

    def grids(p, c_default):
        p.add_argument("--methods", nargs="+", choices=METHODS)
        p.add_argument("--c", nargs="+", type=_positive, default=c_default,
                       help="variance ratios c")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("analyze", help="results table for a study file")
    p.add_argument("input", nargs="?", help="study CSV (default: bundled SSRP records)")
    common(p, 1 / 3)
    p.add_argument("--truncate", action="store_true", help="one-sided Bayes factors")
    p.add_argument("--exact", action="store_true", help="exact-likelihood columns for smd/binomial files")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("curves", help="plot-ready curve tables")
    p.add_argument("kind", choices=CURVE_KINDS)
    common(p)
    p.add_argument("--methods", nargs="+", choices=METHODS)
    p.add_argument("--zo", nargs="+", type=float, help="original z-values (bf_vs_g)")
    p.add_argument("--c", nargs="+", type=_positive)
    p.add_argument("--hypothesis", choices=("conditional", "predictive"))
    p.add_argument("--points", type=int)
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("power", help="success probability given the original study")
    common(p)
    grids(p, [1.0])
    p.add_argument("--zo", nargs="+", type=float, default=[2.0, 2.5, 3.0])
    p.add_argument("--hypothesis", choices=("conditional", "predictive"), default="conditional")
    p.add_argument("--alpha", type=_level, help="plain sceptical p-value threshold")
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("t1e", help="type I error rates")
    common(p)
    grids(p, [0.5, 1.0, 2.0, 4.0, 8.0])
    p.add_argument("--alpha", type=_level, help="plain sceptical p-value threshold")
    p.set_defaults(func=_cmd_t1e)

    p = sub.add_parser("mc-check", help="compare analytic rates with simulation")
    common(p)
    grids(p, [0.5, 1.0, 2.0, 4.0])
    p.add_argument("--zo", nargs=1, type=float)
    p.add_argument("--seed", type=int, default=20211)
    p.add_argument("--n-sims", type=int, default=1_000_000)
    p.add_argument("--tolerance", type=float, default=3.0,
                   help="in binomial standard errors at the analytic rate")
    p.set_defaults(func=_cmd_mc_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HeaderError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
