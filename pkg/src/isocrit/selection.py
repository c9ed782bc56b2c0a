"""CIC_s model selection between constrained and unconstrained estimators, plus tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import special

from . import designcov, estimators, isotonic
from .errors import BudgetRequired, DimensionMismatch, SingularCovariance
from .estimators import HAJEK, HT, DomainEstimate
from .isotonic import PoolingPartition
from .survey import DesignSample, Population, WeightMatrixSpec

CONSTRAINED = "constrained"
UNCONSTRAINED = "unconstrained"
DEFAULT_C = 2.0
SINGULAR_CONDITION = 1e12


def _weights(W) -> np.ndarray:
    if isinstance(W, WeightMatrixSpec):
        return np.asarray(W.weights)
    w = np.asarray(W, dtype=float)
    return w / math.fsum(w)


def sse(y, theta, W) -> float:
    """Weighted squared distance between unconstrained and constrained fits."""
    y = np.asarray(y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    w = _weights(W)
    if not (y.shape == theta.shape == w.shape):
        raise DimensionMismatch("y, theta and W must have the same length")
    return math.fsum(w * (y - theta) ** 2)


@dataclass(frozen=True)
class CicReport:
    sse_term: float
    trace_term: float
    trace_unconstrained: float
    cic_constrained: float
    cic_unconstrained: float
    chosen: str
    penalty_constant: float = DEFAULT_C

    def as_dict(self) -> dict:
        return {
            "sse": self.sse_term,
            "trace": self.trace_term,
            "trace_unconstrained": self.trace_unconstrained,
            "constrained": self.cic_constrained,
            "unconstrained": self.cic_unconstrained,
            "chosen": self.chosen,
            "C": self.penalty_constant,
        }


def _weighted_trace(w: np.ndarray, cov: np.ndarray) -> float:
    return math.fsum(w * np.diag(cov))


def cic(y, theta, W, cov_theta_y, cov_y_y, C: float = DEFAULT_C) -> CicReport:
    """Compare CIC_s of the constrained fit against that of the unconstrained one.

    ``cov_theta_y`` is the estimated covariance between the constrained and
    unconstrained estimators under the observed pooling (``P Σ̂`` in the HT
    setting) and ``cov_y_y`` that of the unconstrained estimator.  Ties go to
    the constrained estimator.
    """
    if not C > 0:
        raise ValueError("penalty constant must be positive")
    y = np.asarray(y, dtype=float)
    w = _weights(W)
    D = len(y)
    cov_theta_y = np.asarray(cov_theta_y, dtype=float)
    cov_y_y = np.asarray(cov_y_y, dtype=float)
    if cov_theta_y.shape != (D, D) or cov_y_y.shape != (D, D) or len(w) != D:
        raise DimensionMismatch(f"expected {D}x{D} covariances and {D} weights")
    fit = sse(y, theta, w)
    tr_c = _weighted_trace(w, cov_theta_y)
    tr_u = _weighted_trace(w, cov_y_y)
    cic_c = fit + C * tr_c
    cic_u = C * tr_u
    chosen = UNCONSTRAINED if cic_u < cic_c else CONSTRAINED
    return CicReport(fit, tr_c, tr_u, cic_c, cic_u, chosen, C)


def cic_ht(estimate: DomainEstimate, theta, partition: PoolingPartition, sigma: np.ndarray, C: float = DEFAULT_C) -> CicReport:
    """HT form: weights N_d/N and penalty trace(W_U P Σ̂)."""
    P = isotonic.projection_matrix(partition, estimate.weights)
    return cic(estimate.means, theta, estimate.weights, P @ sigma, sigma, C)


def adaptive_estimate(report: CicReport, y, theta) -> np.ndarray:
    return np.array(y if report.chosen == UNCONSTRAINED else theta, dtype=float)


def chi_sq_sf(x: float, df: int) -> float:
    """Upper tail probability of the chi-square distribution."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if df < 1:
        raise ValueError("df must be at least 1")
    if x == 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


@dataclass(frozen=True)
class TestResult:
    Q: float | None
    df: int
    k: int
    p_value: float | None
    p0: float | None = None
    reason: str | None = None

    __test__ = False  # not a pytest class

    @property
    def available(self) -> bool:
        return self.p_value is not None

    def rejects(self, alpha: float = 0.05) -> bool:
        return self.available and self.p_value < alpha

    def as_dict(self) -> dict:
        return {
            "available": self.available,
            "Q": self.Q,
            "df": self.df,
            "k": self.k,
            "p_value": self.p_value if self.available else "unavailable",
            "p0": self.p0,
            "reason": self.reason,
        }


def factor_covariance(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of ``cov``; raises SingularCovariance when not a usable covariance."""
    cov = np.asarray(cov, dtype=float)
    if not np.all(np.isfinite(cov)):
        raise SingularCovariance("covariance has non-finite entries")
    eig = np.linalg.eigvalsh((cov + cov.T) / 2.0)
    top = np.max(np.abs(eig))
    if top == 0 or np.min(eig) <= 0 or top / np.min(eig) > SINGULAR_CONDITION:
        raise SingularCovariance("estimated covariance is singular or not positive definite")
    try:
        return scipy.linalg.cholesky(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(str(exc)) from exc


def _quadratic(resid: np.ndarray, chol: np.ndarray) -> float:
    z = scipy.linalg.solve_triangular(chol, resid, lower=True)
    return float(z @ z)


def wald_test(y, theta, partition: PoolingPartition, cov_y_y) -> TestResult:
    """Wald statistic of the observed pooling against a chi-square with D - k df."""
    y = np.asarray(y, dtype=float)
    D, k = len(y), partition.k
    if k == D:
        return TestResult(0.0, 0, k, 1.0)
    try:
        chol = factor_covariance(cov_y_y)
    except SingularCovariance as exc:
        return TestResult(None, D - k, k, None, reason=str(exc))
    Q = _quadratic(y - np.asarray(theta, dtype=float), chol)
    return TestResult(Q, D - k, k, chi_sq_sf(Q, D - k))


def monotone_probability(cov: np.ndarray, draws: int, rng: np.random.Generator, chol: np.ndarray | None = None) -> float:
    """Monte Carlo probability that a mean-zero normal vector with covariance ``cov`` is nondecreasing."""
    chol = factor_covariance(cov) if chol is None else chol
    z = rng.standard_normal((draws, chol.shape[0])) @ chol.T
    return float(np.count_nonzero(np.all(np.diff(z, axis=1) >= 0, axis=1)) / draws)


def conditional_test(y, theta, partition: PoolingPartition, cov_y_y, mc_draws: int = 10_000, seed=None) -> TestResult:
    """Conditional test: Q is referred to a mixture with mass p0 at zero and chi-square(D - k) otherwise.

    p0 is the probability, under equal means, that the unconstrained vector is
    already monotone; it is estimated from ``mc_draws`` normal draws with the
    estimated covariance.  The p-value is P(Q* >= Q) = (1 - p0) SF(Q) for Q > 0.
    """
    if mc_draws < 1000:
        raise ValueError("mc_draws must be at least 1000")
    y = np.asarray(y, dtype=float)
    D, k = len(y), partition.k
    if k == D:
        return TestResult(0.0, 0, k, 1.0)
    try:
        chol = factor_covariance(cov_y_y)
    except SingularCovariance as exc:
        return TestResult(None, D - k, k, None, reason=str(exc))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p0 = monotone_probability(cov_y_y, mc_draws, rng, chol)
    Q = _quadratic(y - np.asarray(theta, dtype=float), chol)
    return TestResult(Q, D - k, k, (1.0 - p0) * chi_sq_sf(Q, D - k), p0=p0)


@dataclass(frozen=True)
class SampleAnalysis:
    """Everything computed from one sample: fits, pooling, covariances, CIC_s."""

    estimate: DomainEstimate
    theta: np.ndarray
    partition: PoolingPartition
    cov_theta_y: np.ndarray
    cov_y_y: np.ndarray
    report: CicReport
    kernel: object = field(repr=False, default=None)

    @property
    def adaptive(self) -> np.ndarray:
        return adaptive_estimate(self.report, self.estimate.means, self.theta)


def analyze_sample(sample: DesignSample, flavor: str = HAJEK, N_d=None, C: float = DEFAULT_C) -> SampleAnalysis:
    """Unconstrained fit, weighted PAVA, covariance estimates and the CIC_s decision."""
    kernel = sample.check_kernel()
    if flavor == HAJEK:
        est = estimators.hajek_domain_means(sample)
        theta, part = isotonic.weighted_pava(est.means, est.weights)
        cov_ty, cov_yy = designcov.cov_hat_pooled(sample, part, kernel)
    elif flavor == HT:
        est = estimators.ht_domain_means(sample, N_d)
        theta, part = isotonic.weighted_pava(est.means, est.weights)
        cov_yy = designcov.sigma_hat(sample, N_d, kernel)
        cov_ty = isotonic.projection_matrix(part, est.weights) @ cov_yy
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    report = cic(est.means, theta, est.weights, cov_ty, cov_yy, C)
    return SampleAnalysis(est, theta, part, cov_ty, cov_yy, report, kernel)


@dataclass(frozen=True)
class PseEstimate:
    value: float
    std_error: float
    exact: bool


def _ht_fits(pop: Population, design, indices, estimator: str) -> tuple[np.ndarray, np.ndarray]:
    sample = design.realize(pop, indices)
    est = estimators.ht_domain_means(sample, pop.N_d, allow_empty=True)
    if estimator == UNCONSTRAINED:
        return est.means, est.means
    theta, _ = isotonic.weighted_pava(est.means, est.weights)
    return est.means, theta


def pse_exact(pop: Population, design, estimator: str = CONSTRAINED, budget: int | None = None,
              seed=None, max_support: int = 2000) -> PseEstimate:
    """Predictive squared error of the HT-based estimator against an independent replicate sample.

    Exact double enumeration over the design support when it has at most
    ``max_support`` samples; otherwise Monte Carlo over ``budget`` sample pairs.
    """
    if estimator not in (CONSTRAINED, UNCONSTRAINED):
        raise ValueError(f"unknown estimator {estimator!r}")
    w = pop.N_d / pop.N
    size = design.support_size(pop) if hasattr(design, "support_size") else None
    if size is not None and size <= max_support:
        ys, fits, probs = [], [], []
        for idx, prob in design.enumerate(pop):
            yv, fv = _ht_fits(pop, design, idx, estimator)
            ys.append(yv)
            fits.append(fv)
            probs.append(prob)
        ys, fits, probs = np.array(ys), np.array(fits), np.array(probs)
        # loss[s, s*] = (y_{s*} - fit_s)' W (y_{s*} - fit_s)
        diff = ys[None, :, :] - fits[:, None, :]
        loss = np.einsum("abd,d,abd->ab", diff, w, diff)
        return PseEstimate(float(probs @ loss @ probs), 0.0, True)
    if budget is None:
        raise BudgetRequired("design support too large to enumerate; supply a Monte Carlo budget")
    rng = np.random.default_rng(seed)
    losses = np.empty(budget)
    for b in range(budget):
        _, fit = _ht_fits(pop, design, design.draw_indices(pop, rng), estimator)
        y_star, _ = _ht_fits(pop, design, design.draw_indices(pop, rng), UNCONSTRAINED)
        losses[b] = math.fsum(w * (y_star - fit) ** 2)
    se = float(losses.std(ddof=1) / math.sqrt(budget)) if budget > 1 else float("nan")
    return PseEstimate(float(losses.mean()), se, False)
