"""Replication engine: repeated sampling from one fixed population."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import selection
from ..errors import IsocritError
from ..selection import UNCONSTRAINED
from .scenarios import REPLICATE_STREAM, ScenarioConfig, generate_population, stream

METHODS = ("CIC", "Wald", "Conditional")
# per-replicate decision codes
UNAVAILABLE, KEEP, SWITCH = -1, 0, 1


def mse_accumulate(estimates, target, weights) -> float:
    """Average weighted squared deviation of replicate estimates from the population means."""
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    dev = est - np.asarray(target, dtype=float)
    return math.fsum((dev**2) @ w) / est.shape[0]


@dataclass
class SimulationSummary:
    prop_unconstrained: dict
    prop_std_error: dict
    unavailable_count: dict
    mse_unconstrained: float
    mse_constrained: float
    mse_adaptive: float
    ratio_constrained: float
    ratio_adaptive: float
    ratio_std_error: dict
    failed_replicates: int
    reps_used: int
    failure_reasons: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _replicate(config: ScenarioConfig, bound, target, w_u, N_d, rep: int) -> tuple:
    rng = stream(config.seed, REPLICATE_STREAM, rep)
    sample = bound.realize(bound.draw_indices(rng))
    try:
        a = selection.analyze_sample(sample, config.flavor, N_d=N_d, C=config.C)
    except (IsocritError, np.linalg.LinAlgError) as exc:
        # e.g. a sample that misses a domain entirely; counted, not dropped silently
        return type(exc).__name__
    y, theta = a.estimate.means, a.theta
    cic_code = SWITCH if a.report.chosen == UNCONSTRAINED else KEEP
    wald = selection.wald_test(y, theta, a.partition, a.cov_y_y)
    cond = selection.conditional_test(y, theta, a.partition, a.cov_y_y, config.mc_draws, rng)
    codes = [cic_code]
    for test in (wald, cond):
        if not test.available:
            codes.append(UNAVAILABLE)
        else:
            codes.append(SWITCH if test.p_value < config.alpha else KEEP)
    losses = [float(((est - target) ** 2) @ w_u) for est in (y, theta, a.adaptive)]
    return codes, losses


def _run_chunk(config: ScenarioConfig, reps: list[int]) -> list:
    pop = generate_population(config)
    bound = config.sampling_design().bind(pop)
    target = pop.domain_means()
    N_d = pop.N_d
    w_u = N_d / pop.N
    return [_replicate(config, bound, target, w_u, N_d, rep) for rep in reps]


def worker_count() -> int:
    raw = os.environ.get("ISOCRIT_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_replications(config: ScenarioConfig, workers: int | None = None) -> SimulationSummary:
    """Run ``config.reps`` replicates and summarize decisions and MSEs.

    Every replicate draws from its own seeded stream, and records are merged
    in replicate order, so the summary does not depend on ``workers``.
    """
    workers = worker_count() if workers is None else workers
    reps = list(range(config.reps))
    if workers <= 1 or config.reps < 2 * workers:
        records = _run_chunk(config, reps)
    else:
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * workers, chunks))
        records = [None] * config.reps
        for chunk, part in zip(chunks, parts):
            for rep, rec in zip(chunk, part):
                records[rep] = rec
    return summarize(records)


def summarize(records: list) -> SimulationSummary:
    ok = [r for r in records if not isinstance(r, str)]
    failed = len(records) - len(ok)
    reasons = dict(sorted(Counter(r for r in records if isinstance(r, str)).items()))
    if not ok:
        raise IsocritError("every replicate failed")
    codes = np.array([r[0] for r in ok])
    losses = np.array([r[1] for r in ok])
    props, ses, unavailable = {}, {}, {}
    for m, name in enumerate(METHODS):
        col = codes[:, m]
        usable = col != UNAVAILABLE
        unavailable[name] = int(np.count_nonzero(~usable))
        if usable.any():
            p = float(np.count_nonzero(col == SWITCH) / np.count_nonzero(usable))
            props[name] = p
            ses[name] = math.sqrt(p * (1 - p) / np.count_nonzero(usable))
        else:
            props[name] = None
            ses[name] = None
    mse = [math.fsum(losses[:, j]) / len(ok) for j in range(3)]
    ratio_se = {}
    for name, j in (("constrained", 1), ("adaptive", 2)):
        ratio_se[name] = _ratio_se(losses[:, j], losses[:, 0])
    return SimulationSummary(
        prop_unconstrained=props,
        prop_std_error=ses,
        unavailable_count=unavailable,
        mse_unconstrained=mse[0],
        mse_constrained=mse[1],
        mse_adaptive=mse[2],
        ratio_constrained=mse[1] / mse[0] if mse[0] > 0 else float("nan"),
        ratio_adaptive=mse[2] / mse[0] if mse[0] > 0 else float("nan"),
        ratio_std_error=ratio_se,
        failed_replicates=failed,
        reps_used=len(ok),
        failure_reasons=reasons,
    )


def _ratio_se(num: np.ndarray, den: np.ndarray) -> float | None:
    """Delta-method standard error of mean(num) / mean(den) over paired replicates."""
    m = len(num)
    if m < 2:
        return None
    a, b = num.mean(), den.mean()
    if b == 0:
        return None
    cov = np.cov(num, den)
    var = (cov[0, 0] / b**2 - 2 * a * cov[0, 1] / b**3 + a**2 * cov[1, 1] / b**4) / m
    return float(math.sqrt(max(var, 0.0)))
