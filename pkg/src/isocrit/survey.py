"""Finite populations, design samples and joint inclusion probabilities.

Domains are dense integers ``1..D`` everywhere in the public API.  Group labels
(strata or clusters) are arbitrary integers; they only matter to the joint
inclusion structure of the design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

DESIGN_KINDS = ("stratified-SRSWOR", "single-stage-cluster", "independent-approx", "enumerated")


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def group_codes(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary group labels to codes ``0..G-1``; returns (codes, unique labels)."""
    uniq, codes = np.unique(labels, return_inverse=True)
    return codes.astype(np.intp), uniq


@dataclass(frozen=True)
class Population:
    """A finite population partitioned into ``D`` domains.

    ``domain`` holds 1-based domain indices, ``group`` the stratum or cluster
    label of each unit.
    """

    y: np.ndarray
    domain: np.ndarray
    group: np.ndarray
    D: int

    def __post_init__(self):
        object.__setattr__(self, "y", _frozen(self.y))
        object.__setattr__(self, "domain", _frozen(self.domain, np.intp))
        object.__setattr__(self, "group", _frozen(self.group, np.intp))
        if self.D < 1:
            raise ValueError("D must be at least 1")
        if not (len(self.y) == len(self.domain) == len(self.group)):
            raise ValueError("y, domain and group must have equal length")
        if len(self.domain) and (self.domain.min() < 1 or self.domain.max() > self.D):
            raise ValueError("domain indices must lie in 1..D")

    @property
    def N(self) -> int:
        return len(self.y)

    @property
    def N_d(self) -> np.ndarray:
        return np.bincount(self.domain - 1, minlength=self.D)

    def domain_means(self) -> np.ndarray:
        """Finite-population domain means, the targets of estimation."""
        out = np.empty(self.D)
        for d in range(self.D):
            vals = self.y[self.domain == d + 1]
            out[d] = math.fsum(vals) / len(vals) if len(vals) else np.nan
        return out

    def block_mean(self, i: int, j: int) -> float:
        mask = (self.domain >= i) & (self.domain <= j)
        return math.fsum(self.y[mask]) / int(mask.sum())


class CheckKernel(Protocol):
    """Symmetric n x n matrix over sampled (or population) units."""

    def bilinear(self, a: np.ndarray, b: np.ndarray) -> np.ndarray: ...

    def dense(self) -> np.ndarray: ...


@dataclass(frozen=True)
class GroupedKernel:
    """Matrix with a per-unit diagonal, a constant per group for distinct units of
    the same group, and one constant for pairs in different groups.

    ``bilinear`` costs O(n) per column instead of O(n^2).
    """

    diag: np.ndarray
    group: np.ndarray  # codes 0..G-1
    within: np.ndarray  # one value per group code
    cross: float

    def bilinear(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Return ``a.T @ K @ b`` for column blocks ``a`` (n, p) and ``b`` (n, q)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        vec_a, vec_b = a.ndim == 1, b.ndim == 1
        a2 = a[:, None] if vec_a else a
        b2 = b[:, None] if vec_b else b
        w_unit = self.within[self.group]
        out = (a2 * (self.diag - w_unit)[:, None]).T @ b2
        G = len(self.within)
        ga = _group_sums(a2, self.group, G)
        gb = _group_sums(b2, self.group, G)
        out += (ga * (self.within - self.cross)[:, None]).T @ gb
        if self.cross != 0.0:
            out += self.cross * np.outer(a2.sum(axis=0), b2.sum(axis=0))
        if vec_a and vec_b:
            return out[0, 0]
        if vec_a:
            return out[0]
        if vec_b:
            return out[:, 0]
        return out

    def dense(self) -> np.ndarray:
        same = self.group[:, None] == self.group[None, :]
        m = np.where(same, self.within[self.group][:, None], self.cross)
        np.fill_diagonal(m, self.diag)
        return m


@dataclass(frozen=True)
class DenseKernel:
    matrix: np.ndarray

    def bilinear(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.asarray(a, float).T @ self.matrix @ np.asarray(b, float)

    def dense(self) -> np.ndarray:
        return np.array(self.matrix)


def _group_sums(a: np.ndarray, codes: np.ndarray, G: int) -> np.ndarray:
    out = np.empty((G, a.shape[1]))
    for j in range(a.shape[1]):
        out[:, j] = np.bincount(codes, weights=a[:, j], minlength=G)
    return out


@dataclass(frozen=True)
class GroupedJoint:
    """Joint inclusion probabilities that are constant within and across groups.

    ``within[g]`` is pi_kl for distinct units of group ``g`` and ``cross`` is
    pi_kl for units in different groups.  ``None`` in either place means the
    pair is independent, pi_kl = pi_k * pi_l.  Indices passed to ``__call__``
    are positions in the sample.
    """

    pi: np.ndarray
    group: np.ndarray
    within: np.ndarray | None
    cross: float | None

    def __post_init__(self):
        object.__setattr__(self, "pi", _frozen(self.pi))
        codes, _ = group_codes(np.asarray(self.group))
        object.__setattr__(self, "group", _frozen(codes, np.intp))
        if self.within is not None:
            object.__setattr__(self, "within", _frozen(self.within))

    def __call__(self, k: int, l: int) -> float:
        if k == l:
            return float(self.pi[k])
        if self.group[k] == self.group[l]:
            if self.within is None:
                return float(self.pi[k] * self.pi[l])
            return float(self.within[self.group[k]])
        if self.cross is None:
            return float(self.pi[k] * self.pi[l])
        return float(self.cross)

    @property
    def n_groups(self) -> int:
        return int(self.group.max()) + 1 if len(self.group) else 0

    def check_kernel(self) -> GroupedKernel:
        """Kernel of Delta_kl / pi_kl over the sampled units."""
        G = self.n_groups
        diag = 1.0 - self.pi
        within = np.zeros(G)
        if self.within is not None:
            for g in range(G):
                members = self.pi[self.group == g]
                if len(members) < 2:
                    continue
                if np.ptp(members) != 0:
                    raise ValueError("pi must be constant within a group with stated joint probability")
                within[g] = 1.0 - members[0] ** 2 / self.within[g]
        cross = 0.0
        if self.cross is not None and G > 1:
            if np.ptp(self.pi) != 0:
                raise ValueError("pi must be constant when a cross-group joint probability is stated")
            cross = 1.0 - self.pi[0] ** 2 / self.cross
        return GroupedKernel(diag, self.group, within, cross)

    def pairs_positive(self) -> list[str]:
        problems = []
        counts = np.bincount(self.group, minlength=self.n_groups) if len(self.group) else np.array([])
        if self.within is not None:
            for g, c in enumerate(counts):
                if c >= 2 and not self.within[g] > 0:
                    problems.append(f"nonmeasurable pair: within-group joint probability {self.within[g]} in group {g}")
        if self.cross is not None and np.count_nonzero(counts) > 1 and not self.cross > 0:
            problems.append(f"nonmeasurable pair: cross-group joint probability {self.cross}")
        return problems


@dataclass(frozen=True)
class DenseJoint:
    """Explicit matrix of joint inclusion probabilities over the sampled units."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    def __call__(self, k: int, l: int) -> float:
        return float(self.matrix[k, l])

    def check_kernel(self) -> DenseKernel:
        pi = np.diag(self.matrix)
        return DenseKernel(1.0 - np.outer(pi, pi) / self.matrix)


JointProvider = Callable[[int, int], float]


@dataclass(frozen=True)
class DesignSample:
    """Sampled units with first-order inclusion probabilities and a joint provider."""

    y: np.ndarray
    pi: np.ndarray
    domain: np.ndarray
    group: np.ndarray
    D: int
    joint: JointProvider
    design_kind: str = "enumerated"
    units: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "y", _frozen(self.y))
        object.__setattr__(self, "pi", _frozen(self.pi))
        object.__setattr__(self, "domain", _frozen(self.domain, np.intp))
        object.__setattr__(self, "group", _frozen(self.group, np.intp))
        if self.design_kind not in DESIGN_KINDS:
            raise ValueError(f"unknown design kind {self.design_kind!r}")
        n = len(self.y)
        if not (len(self.pi) == len(self.domain) == len(self.group) == n):
            raise ValueError("unit arrays must have equal length")

    @property
    def n(self) -> int:
        return len(self.y)

    def check_kernel(self) -> CheckKernel:
        """Delta_kl / pi_kl over sampled units, structured when the provider allows it."""
        if hasattr(self.joint, "check_kernel"):
            return self.joint.check_kernel()
        n = self.n
        m = np.empty((n, n))
        for k in range(n):
            for l in range(n):
                m[k, l] = self.joint(k, l)
        return DenseJoint(m).check_kernel()


@dataclass(frozen=True)
class WeightMatrixSpec:
    """Diagonal weights of the quadratic loss: N_d/N (population) or N̂_d/N̂ (estimated)."""

    kind: str
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        object.__setattr__(self, "weights", w)
        if self.kind not in ("population", "estimated"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    @classmethod
    def from_sizes(cls, sizes: Sequence[float], kind: str = "population") -> "WeightMatrixSpec":
        s = np.asarray(sizes, dtype=float)
        return cls(kind, s / math.fsum(s))


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_design(sample: DesignSample, pair_scan_limit: int = 2000) -> ValidationReport:
    """Collect every measurability or bookkeeping violation in ``sample``.

    Structured joint providers are checked group-wise; otherwise all sampled
    pairs are scanned when ``n <= pair_scan_limit``.
    """
    problems: list[str] = []
    bad = np.flatnonzero(~(sample.pi > 0))
    for k in bad:
        problems.append(f"nonpositive inclusion probability at unit {k}: {sample.pi[k]}")
    for k in np.flatnonzero(sample.pi > 1):
        problems.append(f"inclusion probability above 1 at unit {k}: {sample.pi[k]}")
    out_of_range = (sample.domain < 1) | (sample.domain > sample.D)
    for k in np.flatnonzero(out_of_range):
        problems.append(f"domain index out of range at unit {k}: {sample.domain[k]}")
    counts = np.bincount(sample.domain[~out_of_range] - 1, minlength=sample.D)
    for d in np.flatnonzero(counts == 0):
        problems.append(f"empty domain {d + 1}")

    joint = sample.joint
    if isinstance(joint, GroupedJoint):
        if not np.array_equal(joint.pi, sample.pi):
            problems.append("joint provider diagonal differs from pi")
        problems.extend(joint.pairs_positive())
    elif sample.n <= pair_scan_limit:
        for k in range(sample.n):
            if joint(k, k) != sample.pi[k]:
                problems.append(f"joint diagonal differs from pi at unit {k}")
            for l in range(k + 1, sample.n):
                pkl, plk = joint(k, l), joint(l, k)
                if pkl != plk:
                    problems.append(f"asymmetric joint probability for pair ({k}, {l})")
                if not pkl > 0:
                    problems.append(f"nonmeasurable pair ({k}, {l}): pi_kl = {pkl}")
    return ValidationReport(problems)


def domain_counts(sample: DesignSample, D: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sampled counts ``n_d`` and estimated sizes ``N̂_d = sum 1/pi_k`` per domain."""
    D = sample.D if D is None else D
    idx = sample.domain - 1
    n_d = np.bincount(idx, minlength=D)
    inv = 1.0 / sample.pi
    N_hat = np.array([math.fsum(inv[idx == d]) for d in range(D)])
    return n_d, N_hat


def independent_sample(y, weights, domain, D: int, group=None) -> DesignSample:
    """Sample from survey weights ``w_k = 1/pi_k`` with pairs treated as independent."""
    w = np.asarray(weights, dtype=float)
    pi = 1.0 / w
    group = np.zeros(len(w), dtype=np.intp) if group is None else group
    return DesignSample(
        y=y,
        pi=pi,
        domain=domain,
        group=group,
        D=D,
        joint=GroupedJoint(pi, np.zeros(len(w), dtype=np.intp), None, None),
        design_kind="independent-approx",
    )
