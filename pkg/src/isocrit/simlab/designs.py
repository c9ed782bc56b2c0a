"""Sampling designs with closed-form first- and second-order inclusion probabilities."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleAllocation
from ..survey import DenseJoint, DesignSample, GroupedJoint, GroupedKernel, Population, group_codes


def _members(pop: Population) -> tuple[np.ndarray, list[np.ndarray]]:
    labels = np.unique(pop.group)
    return labels, [np.flatnonzero(pop.group == g) for g in labels]


class StratifiedSRSWOR:
    """Simple random sampling without replacement inside every stratum.

    ``allocation`` gives n_h for the strata in increasing label order, or a
    mapping from stratum label to n_h.
    """

    kind = "stratified-SRSWOR"

    def __init__(self, allocation):
        self.allocation = allocation

    def _sizes(self, labels) -> np.ndarray:
        if isinstance(self.allocation, dict):
            return np.array([self.allocation[int(g)] for g in labels], dtype=np.intp)
        alloc = np.asarray(self.allocation, dtype=np.intp)
        if len(alloc) != len(labels):
            raise InfeasibleAllocation(f"{len(alloc)} stratum sizes for {len(labels)} strata")
        return alloc

    def bind(self, pop: Population) -> "_BoundStratified":
        labels, members = _members(pop)
        n_h = self._sizes(labels)
        N_h = np.array([len(m) for m in members])
        if np.any(n_h < 1) or np.any(n_h > N_h):
            raise InfeasibleAllocation(f"allocation {n_h.tolist()} infeasible for stratum sizes {N_h.tolist()}")
        return _BoundStratified(pop, labels, members, n_h, N_h)

    def population_pi(self, pop: Population) -> np.ndarray:
        return self.bind(pop).unit_pi

    def delta_kernel(self, pop: Population) -> GroupedKernel:
        b = self.bind(pop)
        f = b.n_h / b.N_h
        joint = _same_stratum_joint(b.n_h, b.N_h)
        codes, _ = group_codes(pop.group)
        return GroupedKernel(b.unit_pi * (1 - b.unit_pi), codes, joint - f**2, 0.0)

    def draw_indices(self, pop: Population, rng: np.random.Generator) -> np.ndarray:
        return self.bind(pop).draw_indices(rng)

    def realize(self, pop: Population, indices) -> DesignSample:
        return self.bind(pop).realize(indices)

    def draw(self, pop: Population, rng: np.random.Generator) -> DesignSample:
        b = self.bind(pop)
        return b.realize(b.draw_indices(rng))

    def support_size(self, pop: Population) -> int:
        b = self.bind(pop)
        return math.prod(math.comb(int(N), int(n)) for N, n in zip(b.N_h, b.n_h))

    def enumerate(self, pop: Population):
        """Yield every possible sample (sorted unit indices) with its probability."""
        b = self.bind(pop)
        prob = 1.0 / self.support_size(pop)
        per_stratum = [itertools.combinations(m, int(n)) for m, n in zip(b.members, b.n_h)]
        for combo in itertools.product(*[list(c) for c in per_stratum]):
            yield np.sort(np.concatenate([np.asarray(c, dtype=np.intp) for c in combo])), prob


def _same_stratum_joint(n_h: np.ndarray, N_h: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        joint = n_h * (n_h - 1) / (N_h * (N_h - 1.0))
    return np.where(N_h > 1, joint, 0.0)


@dataclass
class _BoundStratified:
    pop: Population
    labels: np.ndarray
    members: list[np.ndarray]
    n_h: np.ndarray
    N_h: np.ndarray

    def __post_init__(self):
        self.stratum_pi = self.n_h / self.N_h
        self.unit_pi = np.empty(self.pop.N)
        self.unit_code = np.empty(self.pop.N, dtype=np.intp)
        for h, m in enumerate(self.members):
            self.unit_pi[m] = self.stratum_pi[h]
            self.unit_code[m] = h
        self.within = _same_stratum_joint(self.n_h, self.N_h)

    def draw_indices(self, rng: np.random.Generator) -> np.ndarray:
        parts = [m[rng.choice(len(m), size=int(n), replace=False)] for m, n in zip(self.members, self.n_h)]
        return np.sort(np.concatenate(parts))

    def realize(self, indices) -> DesignSample:
        idx = np.asarray(indices, dtype=np.intp)
        pi = self.unit_pi[idx]
        codes = self.unit_code[idx]
        return DesignSample(
            y=self.pop.y[idx],
            pi=pi,
            domain=self.pop.domain[idx],
            group=self.pop.group[idx],
            D=self.pop.D,
            joint=_StratumJoint(pi, codes, self.within, None),
            design_kind="stratified-SRSWOR",
            units=idx,
        )


class _StratumJoint(GroupedJoint):
    """GroupedJoint whose group codes index the full stratum table, not just sampled strata."""

    def __post_init__(self):
        object.__setattr__(self, "pi", np.asarray(self.pi, dtype=float))
        object.__setattr__(self, "group", np.asarray(self.group, dtype=np.intp))

    @property
    def n_groups(self) -> int:
        return len(self.within)


class ClusterSRSWOR:
    """Single-stage cluster sampling: ``r`` of the population's clusters by SRSWOR."""

    kind = "single-stage-cluster"

    def __init__(self, r: int):
        self.r = int(r)

    def bind(self, pop: Population) -> "_BoundCluster":
        labels, members = _members(pop)
        R = len(labels)
        if not 1 <= self.r <= R:
            raise InfeasibleAllocation(f"cannot sample {self.r} of {R} clusters")
        return _BoundCluster(pop, labels, members, self.r, R)

    def population_pi(self, pop: Population) -> np.ndarray:
        b = self.bind(pop)
        return np.full(pop.N, b.pi)

    def delta_kernel(self, pop: Population) -> GroupedKernel:
        b = self.bind(pop)
        codes, _ = group_codes(pop.group)
        delta_same = b.pi - b.pi**2
        return GroupedKernel(np.full(pop.N, delta_same), codes, np.full(b.R, delta_same), b.cross - b.pi**2)

    def draw_indices(self, pop: Population, rng: np.random.Generator) -> np.ndarray:
        return self.bind(pop).draw_indices(rng)

    def realize(self, pop: Population, indices) -> DesignSample:
        return self.bind(pop).realize(indices)

    def draw(self, pop: Population, rng: np.random.Generator) -> DesignSample:
        b = self.bind(pop)
        return b.realize(b.draw_indices(rng))

    def support_size(self, pop: Population) -> int:
        b = self.bind(pop)
        return math.comb(b.R, self.r)

    def enumerate(self, pop: Population):
        b = self.bind(pop)
        prob = 1.0 / math.comb(b.R, self.r)
        for combo in itertools.combinations(range(b.R), self.r):
            yield np.sort(np.concatenate([b.members[c] for c in combo])), prob


@dataclass
class _BoundCluster:
    pop: Population
    labels: np.ndarray
    members: list[np.ndarray]
    r: int
    R: int

    def __post_init__(self):
        self.pi = self.r / self.R
        self.cross = self.r * (self.r - 1) / (self.R * (self.R - 1)) if self.R > 1 else 0.0

    def draw_indices(self, rng: np.random.Generator) -> np.ndarray:
        chosen = rng.choice(self.R, size=self.r, replace=False)
        return np.sort(np.concatenate([self.members[c] for c in chosen]))

    def realize(self, indices) -> DesignSample:
        idx = np.asarray(indices, dtype=np.intp)
        pi = np.full(len(idx), self.pi)
        groups = self.pop.group[idx]
        codes, uniq = group_codes(groups)
        return DesignSample(
            y=self.pop.y[idx],
            pi=pi,
            domain=self.pop.domain[idx],
            group=groups,
            D=self.pop.D,
            joint=GroupedJoint(pi, codes, np.full(len(uniq), self.pi), self.cross),
            design_kind="single-stage-cluster",
            units=idx,
        )


class ExplicitDesign:
    """A design given by its full support: samples (unit index tuples) and their probabilities.

    Inclusion probabilities are summed directly from the support, so this
    serves as a brute-force reference for any small design.
    """

    kind = "enumerated"

    def __init__(self, samples, probs):
        self.samples = [np.sort(np.asarray(s, dtype=np.intp)) for s in samples]
        self.probs = np.asarray(probs, dtype=float)
        if len(self.samples) != len(self.probs):
            raise ValueError("one probability per sample")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError("sample probabilities must sum to 1")

    def joint_matrix(self, N: int) -> np.ndarray:
        M = np.zeros((N, N))
        for s, p in zip(self.samples, self.probs):
            M[np.ix_(s, s)] += p
        return M

    def population_pi(self, pop: Population) -> np.ndarray:
        return np.diag(self.joint_matrix(pop.N)).copy()

    def delta_kernel(self, pop: Population):
        from ..survey import DenseKernel

        M = self.joint_matrix(pop.N)
        pi = np.diag(M)
        return DenseKernel(M - np.outer(pi, pi))

    def realize(self, pop: Population, indices) -> DesignSample:
        idx = np.asarray(indices, dtype=np.intp)
        M = self.joint_matrix(pop.N)[np.ix_(idx, idx)]
        return DesignSample(
            y=pop.y[idx],
            pi=np.diag(M),
            domain=pop.domain[idx],
            group=pop.group[idx],
            D=pop.D,
            joint=DenseJoint(M),
            design_kind="enumerated",
            units=idx,
        )

    def draw_indices(self, pop: Population, rng: np.random.Generator) -> np.ndarray:
        return self.samples[rng.choice(len(self.samples), p=self.probs)]

    def draw(self, pop: Population, rng: np.random.Generator) -> DesignSample:
        return self.realize(pop, self.draw_indices(pop, rng))

    def support_size(self, pop: Population) -> int:
        return len(self.samples)

    def enumerate(self, pop: Population):
        yield from zip(self.samples, self.probs)


def draw_stsi_sample(pop: Population, allocation, seed) -> DesignSample:
    """One stratified SRSWOR sample; strata are the population's group labels."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return StratifiedSRSWOR(allocation).draw(pop, rng)


def draw_cluster_sample(pop: Population, r: int, seed) -> DesignSample:
    """All units of ``r`` clusters chosen by SRSWOR; clusters are the population's group labels."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return ClusterSRSWOR(r).draw(pop, rng)
