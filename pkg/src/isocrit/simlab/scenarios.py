"""Scenario configuration, limiting domain means and finite-population synthesis."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, IndivisibleSizes
from ..survey import Population
from .designs import ClusterSRSWOR, StratifiedSRSWOR

SHAPES = ("monotone", "flat", "non-monotone", "pulldown", "delta")
POPULATION_STREAM = 0
REPLICATE_STREAM = 1


def s1(d, D):
    x = 5.0 * d / D - 2.0
    return 2.0 * math.exp(x) / (1.0 + math.exp(x))


def s2(d, D):
    x = 5.0 * d / D - 2.0
    return 4.0 * math.exp(x) / (1.0 + math.exp(x))


def s3(d, D):
    x = 20.0 * d / D - 10.0
    return math.exp(x) / (1.0 + math.exp(x))


SIGMOIDS = {"S1": s1, "S2": s2, "S3": s3}


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation cell.

    ``design`` is ``"stsi"`` (with ``allocation`` of per-stratum sizes over
    ``H`` strata) or ``"cluster"`` (``r`` of ``R`` clusters).  ``sigma`` is the
    normal standard deviation and also scales the auxiliary ranking variable.
    """

    D: int = 4
    sigmoid: str = "S1"
    shape: str = "monotone"
    t: float = 0.0
    delta: float = 0.0
    dist: str = "normal"
    sigma: float = 3.0
    N: int = 10_000
    design: str = "stsi"
    H: int = 4
    allocation: tuple[int, ...] = (25, 50, 50, 75)
    R: int = 100
    r: int = 2
    reps: int = 10_000
    seed: int = 1
    flavor: str = "Hajek"
    C: float = 2.0
    mc_draws: int = 10_000
    alpha: float = 0.05
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "allocation", tuple(int(a) for a in self.allocation))
        self.validate()

    def validate(self) -> None:
        if self.sigmoid not in SIGMOIDS:
            raise ConfigError(f"unknown sigmoid {self.sigmoid!r}")
        if self.shape not in SHAPES:
            raise ConfigError(f"unknown shape {self.shape!r}")
        if self.dist not in ("normal", "chisq"):
            raise ConfigError(f"unknown distribution {self.dist!r}")
        if self.design not in ("stsi", "cluster"):
            raise ConfigError(f"unknown design {self.design!r}")
        if self.D < 2 and self.shape != "monotone":
            raise ConfigError("pull-down shapes need D >= 2")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if self.flavor not in ("Hajek", "HT"):
            raise ConfigError(f"unknown flavor {self.flavor!r}")
        if not self.C > 0:
            raise ConfigError("C must be positive")
        if self.design == "stsi":
            if len(self.allocation) != self.H:
                raise ConfigError(f"allocation has {len(self.allocation)} entries for H={self.H}")
            if self.N % self.H == 0 and any(a > self.N // self.H or a < 1 for a in self.allocation):
                raise ConfigError(f"allocation {self.allocation} infeasible for strata of size {self.N // self.H}")
        elif not 1 <= self.r <= self.R:
            raise ConfigError(f"r={self.r} must lie in 1..{self.R}")

    @property
    def n(self) -> int:
        if self.design == "stsi":
            return sum(self.allocation)
        return self.N // self.R * self.r

    @property
    def groups(self) -> int:
        return self.H if self.design == "stsi" else self.R

    def sampling_design(self):
        if self.design == "stsi":
            return StratifiedSRSWOR(self.allocation)
        return ClusterSRSWOR(self.r)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["allocation"] = list(self.allocation)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        data = dict(data)
        if "allocation" in data:
            data["allocation"] = tuple(data["allocation"])
        return cls(**data)


def make_scenario_means(config: ScenarioConfig) -> np.ndarray:
    """Limiting domain means for the configured sigmoid and right-tail shape."""
    S = SIGMOIDS[config.sigmoid]
    D = config.D
    mu = np.array([S(d, D) for d in range(1, D + 1)])
    if config.shape == "monotone":
        return mu
    last, prev = S(D, D), S(D - 1, D)
    step = last - prev
    if config.shape == "flat":
        mu[-1] = prev
    elif config.shape == "non-monotone":
        mu[-1] = last - 2.0 * step
    elif config.shape == "pulldown":
        mu[-1] = last - config.t * step
    elif config.shape == "delta":
        mu[-1] = prev - config.delta
    return mu


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, purpose, index...) key."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def generate_population(config: ScenarioConfig, seed: int | None = None) -> Population:
    """Synthesize the finite population with domains of equal size N/D.

    Units are ranked on z = sigma * d/D + N(0, 1) noise and cut into equal
    rank blocks that become the strata (or clusters); ties break by unit index.
    """
    seed = config.seed if seed is None else seed
    D, N = config.D, config.N
    G = config.groups
    if N % D:
        raise IndivisibleSizes(f"N={N} is not divisible by D={D}")
    if N % G:
        raise IndivisibleSizes(f"N={N} is not divisible into {G} equal groups")
    mu = make_scenario_means(config)
    N_d = N // D
    domain = np.repeat(np.arange(1, D + 1), N_d)
    rng = stream(seed, POPULATION_STREAM)
    if config.dist == "normal":
        y = rng.normal(mu[domain - 1], config.sigma)
    else:
        y = rng.chisquare(mu[domain - 1])
    z = config.sigma * domain / D + rng.standard_normal(N)
    order = np.lexsort((np.arange(N), z))
    group = np.empty(N, dtype=np.intp)
    group[order] = np.arange(N) // (N // G) + 1
    return Population(y=y, domain=domain, group=group, D=D)
