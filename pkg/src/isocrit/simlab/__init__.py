"""Simulation lab: scenarios, designs and the replication engine."""

from .designs import ClusterSRSWOR, ExplicitDesign, StratifiedSRSWOR, draw_cluster_sample, draw_stsi_sample
from .engine import SimulationSummary, mse_accumulate, run_replications
from .presets import preset, table, table_numbers
from .scenarios import ScenarioConfig, generate_population, make_scenario_means

__all__ = [
    "ClusterSRSWOR",
    "ExplicitDesign",
    "ScenarioConfig",
    "SimulationSummary",
    "StratifiedSRSWOR",
    "draw_cluster_sample",
    "draw_stsi_sample",
    "generate_population",
    "make_scenario_means",
    "mse_accumulate",
    "preset",
    "run_replications",
    "table",
    "table_numbers",
]
