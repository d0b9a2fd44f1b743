"""Python bindings for the tarraq FANET routing library."""

from ._core import (
    AnalyticScenario,
    RadioModel,
    arrival_rate_closed_form,
    arrival_rate_quadrature,
    change_rate,
    default_grid,
    dewma_update,
    distance_metric,
    effective_range,
    energy_tx_rx,
    entrance_point,
    expected_sensing_delay,
    ncit_distribution,
    neighbor_metric,
    nit_distribution,
    q_fixed_point,
    q_update_value,
    relative_motion,
    resilient_interval,
    run_simulation,
    sensing_delay_cdf,
    sensing_root,
    softmax_probabilities,
    swept_volume,
    whole_link_duration,
)

__all__ = [
    "AnalyticScenario",
    "RadioModel",
    "arrival_rate_closed_form",
    "arrival_rate_quadrature",
    "change_rate",
    "default_grid",
    "dewma_update",
    "distance_metric",
    "effective_range",
    "energy_tx_rx",
    "entrance_point",
    "expected_sensing_delay",
    "ncit_distribution",
    "neighbor_metric",
    "nit_distribution",
    "q_fixed_point",
    "q_update_value",
    "relative_motion",
    "resilient_interval",
    "run_simulation",
    "sensing_delay_cdf",
    "sensing_root",
    "softmax_probabilities",
    "swept_volume",
    "whole_link_duration",
]
