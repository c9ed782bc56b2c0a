"""Parameter grids of the published simulation tables, with their reported values.

Each table is a list of cells (column label, ScenarioConfig) and the reported
rows: proportions choosing the unconstrained estimator under CIC, Wald and
Conditional, then MSE ratios constrained/unconstrained and adaptive/unconstrained.
``None`` marks a cell reported as unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError
from .scenarios import ScenarioConfig

ROWS = ("CIC", "Wald", "Conditional", "ratio_constrained", "ratio_adaptive")
FULL_REPS = 10_000
DESK_REPS = 2_000

# informative allocation over the four z-ranked strata
ALLOCATION_SHARES = (1, 2, 2, 3)


def split_allocation(n: int, shares=ALLOCATION_SHARES) -> tuple[int, ...]:
    total = sum(shares)
    if n % total:
        raise ConfigError(f"n={n} does not split evenly in shares {shares}")
    return tuple(n * s // total for s in shares)


@dataclass(frozen=True)
class TableSpec:
    number: int
    title: str
    cells: tuple[tuple[str, ScenarioConfig], ...]
    reported: dict

    def with_reps(self, reps: int, seed: int | None = None) -> "TableSpec":
        cells = tuple(
            (label, cfg.replace(reps=reps, **({} if seed is None else {"seed": seed}))) for label, cfg in self.cells
        )
        return TableSpec(self.number, self.title, cells, self.reported)


def _rows(cic, wald, cond, rc, ra) -> dict:
    return dict(zip(ROWS, (cic, wald, cond, rc, ra)))


_SIZE_GRID = [(10_000, 200), (10_000, 1000), (10_000, 2000), (20_000, 400), (20_000, 2000),
              (20_000, 4000), (40_000, 800), (40_000, 4000), (40_000, 8000)]


def _size_table(shape: str) -> tuple:
    return tuple(
        (f"N={N} n={n}", ScenarioConfig(shape=shape, N=N, allocation=split_allocation(n), label=f"{shape} N={N} n={n}"))
        for N, n in _SIZE_GRID
    )


def _shape_by_n(base: ScenarioConfig, sizes=(200, 1000, 2000)) -> tuple:
    cells = []
    for shape in ("monotone", "flat", "non-monotone"):
        for n in sizes:
            cells.append((f"{shape} n={n}", base.replace(shape=shape, allocation=split_allocation(n), label=f"{shape} n={n}")))
    return tuple(cells)


def _cluster_cells(pairs) -> tuple:
    base = ScenarioConfig(design="cluster", N=10_000, R=100)
    return tuple((label, base.replace(r=r, label=label, **kw)) for label, r, kw in pairs)


def _delta_cells(D: int, sigma: float, N: int, n: int) -> tuple:
    base = ScenarioConfig(D=D, sigmoid="S3", shape="delta", sigma=sigma, N=N, allocation=split_allocation(n))
    return tuple(
        (f"delta={d:+.2f}", base.replace(delta=d, label=f"D={D} sigma={sigma} delta={d:+.2f}"))
        for d in (-0.45, -0.30, -0.15, 0.0, 0.15, 0.30, 0.45)
    )


_TABLES: dict[int, TableSpec] = {}


def _register(number, title, cells, reported):
    _TABLES[number] = TableSpec(number, title, tuple(cells), reported)


_register(1, "Monotone scenario, D=4, N(mu_d, 3^2)", _size_table("monotone"), _rows(
    [0.061, 0.016, 0.005, 0.045, 0.014, 0.004, 0.022, 4e-4, 0],
    [0.018, 0.003, 0.001, 0.012, 0.002, 0.001, 0.005, 1e-4, 0],
    [0.020, 0.004, 0.001, 0.013, 0.003, 0.001, 0.005, 1e-4, 0],
    [0.721, 0.896, 0.962, 0.774, 0.938, 0.968, 0.875, 0.994, 1],
    [0.796, 0.917, 0.970, 0.831, 0.953, 0.972, 0.902, 0.994, 1],
))
_register(2, "Flat scenario, D=4, N(mu_d, 3^2)", _size_table("flat"), _rows(
    [0.098, 0.045, 0.121, 0.102, 0.081, 0.079, 0.073, 0.134, 0.015],
    [0.033, 0.011, 0.044, 0.036, 0.026, 0.024, 0.023, 0.048, 0.003],
    [0.038, 0.013, 0.047, 0.040, 0.029, 0.026, 0.025, 0.052, 0.004],
    [0.720, 0.860, 0.906, 0.789, 0.898, 0.906, 0.844, 0.918, 0.942],
    [0.813, 0.902, 0.972, 0.869, 0.953, 0.959, 0.901, 0.985, 0.959],
))
_register(3, "Non-monotone scenario, D=4, N(mu_d, 3^2)", _size_table("non-monotone"), _rows(
    [0.118, 0.126, 0.602, 0.126, 0.497, 0.513, 0.172, 0.623, 0.963],
    [0.042, 0.045, 0.386, 0.051, 0.299, 0.302, 0.070, 0.420, 0.894],
    [0.048, 0.049, 0.403, 0.056, 0.310, 0.315, 0.073, 0.434, 0.899],
    [0.712, 0.854, 1.346, 0.695, 1.211, 1.224, 0.860, 1.400, 2.705],
    [0.814, 0.928, 1.128, 0.807, 1.115, 1.118, 0.945, 1.137, 1.037],
))
_register(4, "Skewed case, D=4, chi-square(mu_d)", _shape_by_n(ScenarioConfig(dist="chisq", N=10_000)), _rows(
    [0.029, 0.003, 0, 0.052, 0.079, 0.138, 0.193, 0.326, 0.693],
    [0.014, 0.001, 0, 0.024, 0.031, 0.055, 0.114, 0.172, 0.573],
    [0.014, 0.001, 0, 0.025, 0.033, 0.057, 0.117, 0.177, 0.579],
    [0.808, 0.958, 1, 0.806, 0.853, 0.886, 0.817, 1.034, 1.890],
    [0.855, 0.966, 1, 0.872, 0.936, 0.982, 0.927, 1.086, 1.230],
))
_register(5, "Correlated case (cluster sampling), D=4", _cluster_cells(
    [(f"{shape} r={r}", r, {"shape": shape}) for shape in ("monotone", "flat", "non-monotone") for r in (2, 10, 20)]
), _rows(
    [0.194, 0.025, 0.005, 0.245, 0.085, 0.069, 0.284, 0.461, 0.696],
    [None, 0.011, 0.001, None, 0.071, 0.035, None, 0.417, 0.574],
    [None, 0.019, 0.002, None, 0.072, 0.037, None, 0.422, 0.582],
    [0.717, 0.901, 0.958, 0.690, 0.838, 0.842, 0.694, 1.263, 1.911],
    [0.862, 0.937, 0.966, 0.836, 0.930, 0.929, 0.856, 1.178, 1.233],
))
_register(6, "Increasing monotonicity violation, cluster sampling, D=4", _cluster_cells(
    [(f"t={t} r={r}", r, {"shape": "pulldown", "t": float(t)}) for t in (3, 4, 5) for r in (2, 10, 20)]
), _rows(
    [0.388, 0.708, 0.934, 0.450, 0.881, 0.936, 0.507, 0.963, 1],
    [None, 0.658, 0.882, None, 0.852, 0.835, None, 0.952, 1],
    [None, 0.664, 0.885, None, 0.854, 0.890, None, 0.953, 1],
    [0.798, 1.963, 3.554, 0.882, 2.999, 3.617, 1.022, 4.302, 9.037],
    [0.962, 1.233, 1.107, 1.002, 1.169, 1.109, 1.059, 1.081, 1.000],
))
_register(7, "8-domain case, S2 sigmoid", _shape_by_n(ScenarioConfig(D=8, sigmoid="S2", N=20_000), (400, 2000, 4000)), _rows(
    [0.054, 0.042, 0.003, 0.075, 0.127, 0.060, 0.084, 0.287, 0.631],
    [0.021, 0.010, 4e-4, 0.031, 0.048, 0.017, 0.037, 0.158, 0.439],
    [0.023, 0.010, 4e-4, 0.034, 0.049, 0.017, 0.041, 0.159, 0.441],
    [0.666, 0.902, 0.975, 0.648, 0.877, 0.961, 0.666, 0.935, 1.162],
    [0.719, 0.921, 0.978, 0.710, 0.918, 0.978, 0.731, 0.970, 1.047],
))
_register(8, "S3 sigmoid, D=5, sigma=0.5, n=200", _delta_cells(5, 0.5, 1000, 200), _rows(
    [0.023, 0.023, 0.024, 0.072, 0.352, 0.787, 0.980],
    [0.006, 0.006, 0.006, 0.026, 0.212, 0.667, 0.958],
    [0.006, 0.006, 0.006, 0.026, 0.213, 0.668, 0.959],
    [0.882, 0.880, 0.857, 0.781, 0.957, 1.822, 3.479],
    [0.911, 0.909, 0.887, 0.849, 1.013, 1.153, 1.036],
))
_register(9, "S3 sigmoid, D=5, sigma=1, n=200", _delta_cells(5, 1.0, 1000, 200), _rows(
    [0.065, 0.065, 0.070, 0.099, 0.181, 0.358, 0.600],
    [0.021, 0.021, 0.021, 0.036, 0.095, 0.236, 0.473],
    [0.022, 0.021, 0.021, 0.036, 0.095, 0.237, 0.474],
    [0.806, 0.788, 0.747, 0.704, 0.732, 0.915, 1.296],
    [0.875, 0.858, 0.826, 0.807, 0.861, 1.012, 1.145],
))
# n=800 split 100/200/200/300 cannot come from four strata of 250; N=4000 keeps N_d=200 and n/N=0.2
_register(10, "S3 sigmoid, D=20, sigma=0.5, n=800", _delta_cells(20, 0.5, 4000, 800), _rows(
    [0.037, 0.037, 0.036, 0.034, 0.087, 0.422, 0.881],
    [0.074, 0.074, 0.073, 0.078, 0.229, 0.697, 0.972],
    [0.074, 0.074, 0.073, 0.078, 0.229, 0.697, 0.972],
    [0.503, 0.503, 0.495, 0.468, 0.556, 0.905, 1.533],
    [0.539, 0.539, 0.530, 0.503, 0.625, 0.994, 1.075],
))
_register(11, "S3 sigmoid, D=20, sigma=1, n=800", _delta_cells(20, 1.0, 4000, 800), _rows(
    [0.031, 0.030, 0.028, 0.028, 0.034, 0.067, 0.156],
    [0.081, 0.079, 0.078, 0.084, 0.119, 0.235, 0.466],
    [0.081, 0.079, 0.078, 0.084, 0.119, 0.235, 0.466],
    [0.415, 0.410, 0.398, 0.386, 0.402, 0.475, 0.617],
    [0.451, 0.445, 0.431, 0.420, 0.441, 0.540, 0.723],
))


def table(number: int) -> TableSpec:
    try:
        return _TABLES[int(number)]
    except (KeyError, ValueError):
        raise ConfigError(f"unknown table {number!r}; choose 1..{len(_TABLES)}") from None


def table_numbers() -> list[int]:
    return sorted(_TABLES)


def preset(name: str) -> ScenarioConfig:
    """Scenario named ``tableK`` (first cell) or ``tableK:c`` (1-based cell ``c``)."""
    base, _, cell = name.partition(":")
    if not base.startswith("table"):
        raise ConfigError(f"unknown preset {name!r}")
    spec = table(base[len("table"):])
    idx = int(cell) if cell else 1
    if not 1 <= idx <= len(spec.cells):
        raise ConfigError(f"table {spec.number} has cells 1..{len(spec.cells)}")
    return spec.cells[idx - 1][1]
