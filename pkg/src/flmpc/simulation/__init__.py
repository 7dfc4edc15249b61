from .core import (
    DEFAULT_BUDGET,
    CorruptionSet,
    PrivacyRecord,
    PrivacyReport,
    ViewDistribution,
    Witness,
    check_private_computation,
    enumerate_real_distribution,
    project_views,
    simulate_distribution,
    tv_distance,
)
from .protocols import (
    AggregationProtocol,
    AggregationSimulator,
    FLProtocol,
    FLSimulator,
    label_grid_datasets,
    simulator_for,
)
from .reduction import ReductionReport, check_reduction
