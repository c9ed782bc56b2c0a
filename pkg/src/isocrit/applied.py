"""Applied workflow: survey CSV in, domain-mean analysis report out."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import designcov, selection
from .errors import EmptyDomain, IsocritError
from .survey import DesignSample, GroupedJoint, group_codes, independent_sample

SCHEMA_VERSION = 1
Z_95 = 1.959964


class InputError(IsocritError):
    """Malformed or incomplete input data."""


@dataclass
class SurveyData:
    y: np.ndarray
    weights: np.ndarray
    domain: np.ndarray  # 1..D
    labels: list[str]
    stratum: np.ndarray | None = None
    dropped: int = 0


def _number(raw: str, col: str, line: int) -> float:
    try:
        val = float(raw)
    except (TypeError, ValueError):
        raise InputError(f"line {line}: column {col!r} is not numeric: {raw!r}") from None
    if not math.isfinite(val):
        raise InputError(f"line {line}: column {col!r} is not finite: {raw!r}")
    return val


def _sort_labels(labels) -> list[str]:
    try:
        return sorted(labels, key=float)
    except ValueError:
        return sorted(labels)


def parse_edges(text: str) -> list[float]:
    try:
        edges = [float(e) for e in text.split(",") if e.strip()]
    except ValueError:
        raise InputError(f"bin edges must be comma-separated numbers: {text!r}") from None
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise InputError("bin edges must be at least two strictly increasing numbers")
    return edges


def _fmt_edge(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


def read_survey_csv(path, value_col: str, weight_col: str, domain_col: str | None = None,
                    bin_col: str | None = None, bin_edges: list[float] | None = None,
                    stratum_col: str | None = None, domain_order: list[str] | None = None) -> SurveyData:
    """Read unit records; domains come from a label column or from binning a numeric column.

    Bins are ``[e_{d-1}, e_d)`` with the last bin closed on the right; rows
    outside the edges are dropped and counted.
    """
    if (domain_col is None) == (bin_col is None):
        raise InputError("give exactly one of a domain column or a bin column with edges")
    if bin_col is not None and not bin_edges:
        raise InputError("binning needs bin edges")
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc)) from exc
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        needed = [value_col, weight_col, domain_col or bin_col] + ([stratum_col] if stratum_col else [])
        missing = [c for c in needed if c not in header]
        if missing:
            raise InputError(f"missing columns: {missing}")
        ys, ws, keys, strata = [], [], [], []
        dropped = 0
        for line, row in enumerate(reader, start=2):
            if None in row or any(row.get(c) is None for c in needed):
                raise InputError(f"line {line}: wrong number of fields")
            y = _number(row[value_col], value_col, line)
            w = _number(row[weight_col], weight_col, line)
            if w < 1:
                raise InputError(f"line {line}: survey weight must be at least 1, got {w}")
            if bin_col is not None:
                x = _number(row[bin_col], bin_col, line)
                if x < bin_edges[0] or x > bin_edges[-1]:
                    dropped += 1
                    continue
                key = min(int(np.searchsorted(bin_edges, x, side="right")), len(bin_edges) - 1)
            else:
                key = row[domain_col].strip()
                if key == "":
                    raise InputError(f"line {line}: empty domain label")
            ys.append(y)
            ws.append(w)
            keys.append(key)
            if stratum_col:
                strata.append(row[stratum_col].strip())
    if not ys:
        raise InputError("no usable rows")

    if bin_col is not None:
        labels = [f"[{_fmt_edge(a)},{_fmt_edge(b)}{']' if d == len(bin_edges) - 2 else ')'}"
                  for d, (a, b) in enumerate(zip(bin_edges, bin_edges[1:]))]
        domain = np.asarray(keys, dtype=np.intp)
        counts = np.bincount(domain - 1, minlength=len(labels))
        empty = np.flatnonzero(counts == 0)
        if len(empty):
            raise EmptyDomain(int(empty[0]) + 1)
    else:
        labels = list(domain_order) if domain_order else _sort_labels(set(keys))
        index = {lab: d for d, lab in enumerate(labels, start=1)}
        unknown = sorted(set(keys) - set(index))
        if unknown:
            raise InputError(f"domain labels not in the given order: {unknown}")
        domain = np.array([index[k] for k in keys], dtype=np.intp)
        counts = np.bincount(domain - 1, minlength=len(labels))
        empty = np.flatnonzero(counts == 0)
        if len(empty):
            raise EmptyDomain(int(empty[0]) + 1)
    stratum = None
    if stratum_col:
        stratum, _ = group_codes(np.array(strata))
    return SurveyData(np.array(ys), np.array(ws), domain, labels, stratum, dropped)


def build_sample(data: SurveyData) -> DesignSample:
    """Design sample from survey weights; exact STSI joints when strata are given."""
    D = len(data.labels)
    if data.stratum is None:
        return independent_sample(data.y, data.weights, data.domain, D)
    codes = data.stratum
    H = int(codes.max()) + 1
    within = np.zeros(H)
    for h in range(H):
        w = data.weights[codes == h]
        if np.max(np.abs(w - w[0])) > 1e-9 * w[0]:
            raise InputError(f"stratum {h}: weights differ within the stratum, which STSI requires to be equal")
        n_h = len(w)
        N_h = n_h * w[0]
        if n_h > 1 and N_h > 1:
            within[h] = n_h * (n_h - 1) / (N_h * (N_h - 1))
    pi = 1.0 / data.weights
    return DesignSample(
        y=data.y, pi=pi, domain=data.domain, group=codes, D=D,
        joint=GroupedJoint(pi, codes, within, None), design_kind="stratified-SRSWOR",
    )


@dataclass
class AnalysisReport:
    labels: list[str]
    n_d: list[int]
    N_hat: list[float]
    unconstrained: list[float]
    constrained: list[float]
    blocks: list[list[int]]
    se_unconstrained: list[float]
    se_constrained: list[float]
    cic: selection.CicReport
    wald: selection.TestResult
    conditional: selection.TestResult
    covariance_mode: str
    config: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def intervals(self, which: str) -> list[tuple[float, float]]:
        est = self.unconstrained if which == "unconstrained" else self.constrained
        se = self.se_unconstrained if which == "unconstrained" else self.se_constrained
        return [(e - Z_95 * s, e + Z_95 * s) for e, s in zip(est, se)]

    def to_json(self) -> dict:
        ci_u, ci_c = self.intervals("unconstrained"), self.intervals("constrained")
        block_of = {d: b for b in self.blocks for d in range(b[0], b[1] + 1)}
        return {
            "schema": SCHEMA_VERSION,
            "config": self.config,
            "covariance_mode": self.covariance_mode,
            "estimates": [
                {
                    "domain": d + 1,
                    "label": self.labels[d],
                    "n": self.n_d[d],
                    "N_hat": self.N_hat[d],
                    "unconstrained": self.unconstrained[d],
                    "constrained": self.constrained[d],
                    "block": list(block_of[d + 1]),
                }
                for d in range(len(self.labels))
            ],
            "ci": [
                {
                    "domain": d + 1,
                    "label": self.labels[d],
                    "level": 0.95,
                    "unconstrained": list(ci_u[d]),
                    "constrained": list(ci_c[d]),
                    "se_unconstrained": self.se_unconstrained[d],
                    "se_constrained": self.se_constrained[d],
                }
                for d in range(len(self.labels))
            ],
            "cic": self.cic.as_dict(),
            "tests": {"wald": self.wald.as_dict(), "conditional": self.conditional.as_dict()},
            "flags": self.flags,
        }


def _se(var: np.ndarray, what: str, labels, flags: list[str]) -> list[float]:
    out = []
    for d, v in enumerate(var):
        if v < 0:
            flags.append(f"negative-variance: {what} estimate for domain {labels[d]} has variance {v:.6g}; CI set to zero width")
            v = 0.0
        out.append(math.sqrt(v))
    return out


def analyze(data: SurveyData, C: float = 2.0, seed: int = 0, mc_draws: int = 10_000,
            decreasing: bool = False, config: dict | None = None) -> AnalysisReport:
    """Hájek fit, PAVA, ÂC covariances, CIC_s and both tests for one survey sample."""
    sign = -1.0 if decreasing else 1.0
    sample = build_sample(SurveyData(sign * data.y, data.weights, data.domain, data.labels, data.stratum))
    a = selection.analyze_sample(sample, C=C)
    y, theta = a.estimate.means, a.theta
    wald = selection.wald_test(y, theta, a.partition, a.cov_y_y)
    cond = selection.conditional_test(y, theta, a.partition, a.cov_y_y, mc_draws, seed)
    var_u = np.diag(a.cov_y_y)
    var_c = designcov.block_variances(sample, a.partition, a.kernel)

    flags = []
    mode = "exact-joint" if sample.design_kind == "stratified-SRSWOR" else "independent-approx"
    flags.append(f"covariance-mode: {mode}")
    if mode == "independent-approx":
        flags.append("approximation: joint inclusion probabilities taken as pi_k*pi_l for distinct units")
    if decreasing:
        flags.append("direction: nonincreasing fit (values negated internally)")
    if data.dropped:
        flags.append(f"dropped-rows: {data.dropped} rows outside the bin edges")
    n_d = np.bincount(sample.domain - 1, minlength=sample.D)
    for d in np.flatnonzero(n_d == 1):
        flags.append(f"degenerate-ci: domain {data.labels[d]} has a single sampled unit, variance estimate is 0")
    for name, test in (("wald", wald), ("conditional", cond)):
        if not test.available:
            flags.append(f"test-unavailable: {name} ({test.reason})")
    se_u = _se(var_u, "unconstrained", data.labels, flags)
    se_c = _se(var_c, "constrained", data.labels, flags)
    for i, j in a.partition.blocks:
        if j > i:
            if any(var_c[d] > var_u[d] for d in range(i - 1, j)):
                flags.append(f"wider-constrained-ci: pooled block {i}..{j} has a constrained variance above an unconstrained one")
    return AnalysisReport(
        labels=list(data.labels),
        n_d=[int(v) for v in n_d],
        N_hat=[float(v) for v in a.estimate.weights],
        unconstrained=[float(sign * v) for v in y],
        constrained=[float(sign * v) for v in theta],
        blocks=[list(b) for b in a.partition.blocks],
        se_unconstrained=se_u,
        se_constrained=se_c,
        cic=a.report,
        wald=wald,
        conditional=cond,
        covariance_mode=mode,
        config=dict(config or {}),
        flags=flags,
    )


ESTIMATE_COLUMNS = ("domain", "label", "n", "unconstrained", "constrained",
                    "unconstrained_lo", "unconstrained_hi", "constrained_lo", "constrained_hi")


def write_estimates_csv(report: AnalysisReport, path) -> None:
    ci_u, ci_c = report.intervals("unconstrained"), report.intervals("constrained")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ESTIMATE_COLUMNS)
        for d, label in enumerate(report.labels):
            writer.writerow([d + 1, label, report.n_d[d], repr(report.unconstrained[d]), repr(report.constrained[d]),
                             repr(ci_u[d][0]), repr(ci_u[d][1]), repr(ci_c[d][0]), repr(ci_c[d][1])])


def read_estimates_csv(path) -> list[dict]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rec = {"domain": int(row["domain"]), "label": row["label"], "n": int(row["n"])}
            for col in ESTIMATE_COLUMNS[3:]:
                rec[col] = float(row[col])
            out.append(rec)
    return out
