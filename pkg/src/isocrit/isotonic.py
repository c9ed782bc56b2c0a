"""Weighted isotonic projection of domain means.

Only nondecreasing order is handled; negate inputs and outputs for a
nonincreasing fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NonpositiveWeight

CORNER = "corner"
FLAT = "flat"
ABOVE = "above"


def _check_weights(means, weights) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(means, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.shape != w.shape or y.ndim != 1:
        raise ValueError("means and weights must be 1-d arrays of equal length")
    if not np.all(w > 0):
        raise NonpositiveWeight("isotonic weights must be strictly positive")
    return y, w


@dataclass(frozen=True)
class PoolingPartition:
    """Contiguous blocks of domains, 1-based inclusive ``(first, last)`` pairs."""

    blocks: tuple[tuple[int, int], ...]
    block_values: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def D(self) -> int:
        return self.blocks[-1][1]

    def labels(self) -> np.ndarray:
        """Block index (0-based) of each domain."""
        out = np.empty(self.D, dtype=np.intp)
        for b, (i, j) in enumerate(self.blocks):
            out[i - 1 : j] = b
        return out

    def block_of(self, d: int) -> tuple[int, int]:
        for i, j in self.blocks:
            if i <= d <= j:
                return (i, j)
        raise IndexError(d)

    def expand(self) -> np.ndarray:
        """Block values repeated over member domains."""
        return np.asarray(self.block_values)[self.labels()]

    @classmethod
    def singletons(cls, values) -> "PoolingPartition":
        return cls(tuple((d, d) for d in range(1, len(values) + 1)), tuple(float(v) for v in values))


def weighted_pava(means, weights) -> tuple[np.ndarray, PoolingPartition]:
    """Pool adjacent violators under weights; returns the fit and its pooling.

    Adjacent blocks merge only on a strict violation, so tied neighbours stay
    separate blocks and ``partition.k`` counts them individually.
    """
    y, w = _check_weights(means, weights)
    # stack entries: [weight sum, weighted value sum, first, last]
    stack: list[list] = []
    for d in range(len(y)):
        stack.append([w[d], w[d] * y[d], d, d])
        while len(stack) > 1 and stack[-2][1] / stack[-2][0] > stack[-1][1] / stack[-1][0]:
            top = stack.pop()
            prev = stack[-1]
            prev[0] += top[0]
            prev[1] += top[1]
            prev[3] = top[3]
    blocks, values = [], []
    theta = np.empty(len(y))
    for sw, _, first, last in stack:
        if first == last:
            val = float(y[first])
        else:
            # recompute from members for accuracy after repeated merges
            val = math.fsum(w[first : last + 1] * y[first : last + 1]) / math.fsum(w[first : last + 1])
        theta[first : last + 1] = val
        blocks.append((first + 1, last + 1))
        values.append(val)
    return theta, PoolingPartition(tuple(blocks), tuple(values))


def pooled_means_table(means, weights) -> np.ndarray:
    """Matrix ``M[i, j]`` of the weighted mean of domains ``i..j`` (0-based), NaN below the diagonal."""
    y, w = _check_weights(means, weights)
    D = len(y)
    table = np.full((D, D), np.nan)
    for i in range(D):
        for j in range(i, D):
            table[i, j] = math.fsum(w[i : j + 1] * y[i : j + 1]) / math.fsum(w[i : j + 1])
    return table


def max_min_solution(means, weights) -> np.ndarray:
    """Closed-form isotonic fit: theta_d = max over i <= d of min over j >= d of the pooled mean i..j."""
    table = pooled_means_table(means, weights)
    D = table.shape[0]
    theta = np.empty(D)
    np.fill_diagonal(table, np.asarray(means, dtype=float))
    for d in range(D):
        theta[d] = max(min(table[i, j] for j in range(d, D)) for i in range(d + 1))
    return theta


def projection_matrix(partition: PoolingPartition, weights) -> np.ndarray:
    """Weighted projection ``P`` with ``P @ means == theta`` for the given pooling."""
    w = np.asarray(weights, dtype=float)
    D = len(w)
    P = np.zeros((D, D))
    for i, j in partition.blocks:
        sl = slice(i - 1, j)
        P[sl, sl] = w[sl] / math.fsum(w[sl])
    return P


@dataclass(frozen=True)
class GcmDiagnostics:
    """Cumulative sum diagram, its greatest convex minorant and interior-point classes."""

    cum_weight: np.ndarray  # r(0..D)
    cum_value: np.ndarray  # t(0..D)
    minorant: np.ndarray  # g(0..D)
    slopes: np.ndarray  # left-hand slope of the minorant at 1..D
    classification: tuple[str, ...]  # interior indices 1..D-1

    def indices(self, kind: str) -> list[int]:
        return [d + 1 for d, c in enumerate(self.classification) if c == kind]


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def gcm_classify(means, weights) -> GcmDiagnostics:
    """Greatest convex minorant of the cumulative sum diagram, in exact rational arithmetic.

    Interior point ``d`` is a corner if the minorant bends there, flat if it lies
    on a straight stretch of the minorant, and above otherwise.
    """
    y, w = _check_weights(means, weights)
    D = len(y)
    r = [Fraction(0)]
    t = [Fraction(0)]
    for d in range(D):
        r.append(r[-1] + Fraction(float(w[d])))
        t.append(t[-1] + Fraction(float(w[d])) * Fraction(float(y[d])))
    pts = list(zip(r, t))

    hull: list[int] = []
    for d in range(D + 1):
        # strict turn keeps only bend points as hull vertices
        while len(hull) >= 2 and _cross(pts[hull[-2]], pts[hull[-1]], pts[d]) <= 0:
            hull.pop()
        hull.append(d)

    g = [Fraction(0)] * (D + 1)
    slopes = np.empty(D)
    for a, b in zip(hull[:-1], hull[1:]):
        slope = (t[b] - t[a]) / (r[b] - r[a])
        for d in range(a, b + 1):
            g[d] = t[a] + slope * (r[d] - r[a])
        slopes[a:b] = float(slope)

    vertices = set(hull)
    classes = []
    for d in range(1, D):
        if d in vertices:
            classes.append(CORNER)
        elif t[d] == g[d]:
            classes.append(FLAT)
        else:
            classes.append(ABOVE)
    return GcmDiagnostics(
        cum_weight=np.array([float(v) for v in r]),
        cum_value=np.array([float(v) for v in t]),
        minorant=np.array([float(v) for v in g]),
        slopes=slopes,
        classification=tuple(classes),
    )
