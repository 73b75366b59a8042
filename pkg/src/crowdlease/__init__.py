"""Cost-minimal, preference-aware placement of crowdsourced live streams on cloud sites."""

from .baselines import assign_centralized, assign_top_preferred, cds_benchmark_cost
from .cost import (
    Assignment,
    CostBreakdown,
    cdn_cost,
    combined_objective,
    cost_initial,
    global_relative_preference,
    lease_max,
    save_min,
    site_lease_cost,
)
from .graph import MigrationGraph, MigrationVector, build_migration_graph
from .model import CloudSite, PricingPolicy, Region, Scenario, SourceBundle, top_k_index, validate_scenario
from .oracle import brute_force_oracle
from .solver import (
    MigrationSolution,
    apply_migration,
    knapsack_exclude,
    online_service_migration,
    optimal_service_migration,
)

__version__ = "0.1.0"
