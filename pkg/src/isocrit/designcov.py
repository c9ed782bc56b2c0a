"""Design-based covariance of domain and pooled-block mean estimators."""

from __future__ import annotations

import math

import numpy as np

from .errors import EmptyBlock, EmptyDomain, MissingPopulationSizes, UnknownDesignClosedForm
from .isotonic import PoolingPartition
from .survey import CheckKernel, DesignSample, Population

Block = tuple[int, int]


def _block_mask(domain: np.ndarray, block: Block) -> np.ndarray:
    i, j = block
    return (domain >= i) & (domain <= j)


def sigma_hat(sample: DesignSample, N_d, kernel: CheckKernel | None = None, allow_empty: bool = False) -> np.ndarray:
    """Unbiased estimator of the covariance matrix of the HT domain means.

    ``allow_empty`` lets unsampled domains contribute zero rows and columns.
    """
    if N_d is None:
        raise MissingPopulationSizes("sigma_hat needs the population domain sizes")
    N_d = np.asarray(N_d, dtype=float)
    D = sample.D
    counts = np.bincount(sample.domain - 1, minlength=D)
    if not allow_empty and np.any(counts == 0):
        raise EmptyDomain(int(np.flatnonzero(counts == 0)[0]) + 1)
    kernel = sample.check_kernel() if kernel is None else kernel
    expanded = sample.y / sample.pi
    A = np.zeros((sample.n, D))
    A[np.arange(sample.n), sample.domain - 1] = expanded
    S = kernel.bilinear(A, A) / np.outer(N_d, N_d)
    return (S + S.T) / 2.0


def residual_columns(sample: DesignSample, blocks: list[Block]) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``(y_k - block Hájek mean)/pi_k`` on block members, zero elsewhere.

    Returns the (n, len(blocks)) residual matrix and the estimated block sizes.
    """
    inv = 1.0 / sample.pi
    R = np.zeros((sample.n, len(blocks)))
    sizes = np.empty(len(blocks))
    for c, block in enumerate(blocks):
        mask = _block_mask(sample.domain, block)
        if not mask.any():
            raise EmptyBlock(*block)
        size = math.fsum(inv[mask])
        mean = math.fsum(sample.y[mask] * inv[mask]) / size
        R[mask, c] = (sample.y[mask] - mean) * inv[mask]
        sizes[c] = size
    return R, sizes


def ac_hat(sample: DesignSample, block1: Block, block2: Block, kernel: CheckKernel | None = None) -> float:
    """Estimated approximate covariance of the Hájek means of two pooled blocks."""
    kernel = sample.check_kernel() if kernel is None else kernel
    R, sizes = residual_columns(sample, [block1, block2])
    val = kernel.bilinear(R[:, 0], R[:, 1])
    return float(val / (sizes[0] * sizes[1]))


def ac_hat_matrix(sample: DesignSample, rows: list[Block], cols: list[Block], kernel: CheckKernel | None = None) -> np.ndarray:
    """``ac_hat`` for every (row block, column block) pair at once."""
    kernel = sample.check_kernel() if kernel is None else kernel
    Rr, sr = residual_columns(sample, rows)
    if rows == cols:
        Rc, sc = Rr, sr
    else:
        Rc, sc = residual_columns(sample, cols)
    return kernel.bilinear(Rr, Rc) / np.outer(sr, sc)


def cov_hat_pooled(sample: DesignSample, partition: PoolingPartition, kernel: CheckKernel | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Estimated cov(theta, y) under the observed pooling and cov(y, y) for the Hájek means.

    ``cov_theta_y[i, j]`` is ÂC between the block holding domain ``i`` and
    domain ``j``; ``cov_y_y[i, j]`` is ÂC between domains ``i`` and ``j``.
    """
    kernel = sample.check_kernel() if kernel is None else kernel
    D = sample.D
    domains = [(d, d) for d in range(1, D + 1)]
    E, n_hat = residual_columns(sample, domains)
    cov_y_y = kernel.bilinear(E, E) / np.outer(n_hat, n_hat)
    cov_y_y = (cov_y_y + cov_y_y.T) / 2.0
    if partition.k == D:
        return cov_y_y.copy(), cov_y_y
    F, b_hat = residual_columns(sample, list(partition.blocks))
    by_block = kernel.bilinear(F, E) / np.outer(b_hat, n_hat)
    cov_theta_y = by_block[partition.labels()]
    return cov_theta_y, cov_y_y


def block_variances(sample: DesignSample, partition: PoolingPartition, kernel: CheckKernel | None = None) -> np.ndarray:
    """ÂC of each domain's pooled block with itself, expanded to domains."""
    kernel = sample.check_kernel() if kernel is None else kernel
    F, b_hat = residual_columns(sample, list(partition.blocks))
    var = np.diag(np.atleast_2d(kernel.bilinear(F, F)))
    return (var / b_hat**2)[partition.labels()]


def ac_population(pop: Population, design, block1: Block, block2: Block) -> float:
    """Approximate covariance of two pooled Hájek block means over the whole population.

    ``design`` must expose ``population_pi(pop)`` and ``delta_kernel(pop)``
    (the matrix of pi_kl - pi_k pi_l over all units).
    """
    if not (hasattr(design, "population_pi") and hasattr(design, "delta_kernel")):
        raise UnknownDesignClosedForm(f"{type(design).__name__} has no closed-form joint inclusion probabilities")
    pi = design.population_pi(pop)
    kernel = design.delta_kernel(pop)
    cols = []
    sizes = []
    for block in (block1, block2):
        mask = _block_mask(pop.domain, block)
        if not mask.any():
            raise EmptyBlock(*block)
        mean = math.fsum(pop.y[mask]) / int(mask.sum())
        col = np.zeros(pop.N)
        col[mask] = (pop.y[mask] - mean) / pi[mask]
        cols.append(col)
        sizes.append(int(mask.sum()))
    return float(kernel.bilinear(cols[0], cols[1]) / (sizes[0] * sizes[1]))
