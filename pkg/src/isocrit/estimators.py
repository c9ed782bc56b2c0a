"""Unconstrained domain-mean estimators: Horvitz-Thompson and Hájek."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyBlock, EmptyDomain, MissingPopulationSizes
from .survey import DesignSample

HT = "HT"
HAJEK = "Hajek"


@dataclass(frozen=True)
class DomainEstimate:
    """Per-domain means with the weights used to pool them.

    ``weights`` are the known sizes ``N_d`` for HT and ``N̂_d`` for Hájek.
    """

    means: np.ndarray
    weights: np.ndarray
    flavor: str

    def __post_init__(self):
        if self.flavor not in (HT, HAJEK):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if not np.all(np.isfinite(self.means)):
            raise ValueError("means must be finite")
        if np.any(np.asarray(self.weights) <= 0):
            raise ValueError("weights must be strictly positive")

    @property
    def D(self) -> int:
        return len(self.means)


def weighted_sums(sample: DesignSample) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-domain (sum y/pi, sum 1/pi, n_d), accumulated with compensated summation."""
    D = sample.D
    idx = sample.domain - 1
    order = np.argsort(idx, kind="stable")
    cuts = np.searchsorted(idx[order], np.arange(1, D))
    yw = (sample.y / sample.pi)[order]
    w = (1.0 / sample.pi)[order]
    totals = np.array([math.fsum(part) for part in np.split(yw, cuts)])
    sizes = np.array([math.fsum(part) for part in np.split(w, cuts)])
    n_d = np.bincount(idx, minlength=D)
    return totals, sizes, n_d


def _require_nonempty(n_d: np.ndarray) -> None:
    empty = np.flatnonzero(n_d == 0)
    if len(empty):
        raise EmptyDomain(int(empty[0]) + 1)


def ht_domain_means(sample: DesignSample, N_d, allow_empty: bool = False) -> DomainEstimate:
    """Horvitz-Thompson domain means: sum_{s_d} y_k/pi_k divided by the known N_d.

    With ``allow_empty`` an unsampled domain gets the empty-sum value 0, which
    keeps the estimator defined on every sample (needed for exact design
    expectations); by default such samples are rejected.
    """
    if N_d is None:
        raise MissingPopulationSizes("HT estimation needs the population domain sizes N_d")
    N_d = np.asarray(N_d, dtype=float)
    if len(N_d) != sample.D:
        raise MissingPopulationSizes(f"expected {sample.D} domain sizes, got {len(N_d)}")
    totals, _, n_d = weighted_sums(sample)
    if not allow_empty:
        _require_nonempty(n_d)
    return DomainEstimate(totals / N_d, N_d, HT)


def hajek_domain_means(sample: DesignSample) -> DomainEstimate:
    """Hájek domain means: the design-weighted average within each domain."""
    totals, sizes, n_d = weighted_sums(sample)
    _require_nonempty(n_d)
    return DomainEstimate(totals / sizes, sizes, HAJEK)


def pooled_block_mean(sample: DesignSample, i: int, j: int, flavor: str = HAJEK, N_d=None) -> float:
    """Mean of the pooled domains ``i..j`` (1-based, inclusive) computed from unit records.

    Hájek pools with ``sum 1/pi_k`` in the denominator, HT with ``N_i + ... + N_j``.
    """
    if not 1 <= i <= j <= sample.D:
        raise ValueError(f"invalid block {i}..{j} for D={sample.D}")
    mask = (sample.domain >= i) & (sample.domain <= j)
    if not mask.any():
        raise EmptyBlock(i, j)
    total = math.fsum(sample.y[mask] / sample.pi[mask])
    if flavor == HAJEK:
        return total / math.fsum(1.0 / sample.pi[mask])
    if flavor == HT:
        if N_d is None:
            raise MissingPopulationSizes("HT pooling needs N_d")
        return total / math.fsum(np.asarray(N_d, dtype=float)[i - 1 : j])
    raise ValueError(f"unknown flavor {flavor!r}")
