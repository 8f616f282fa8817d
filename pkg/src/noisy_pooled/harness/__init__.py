"""Experiment harness: grids, trials, CSV and plot-data output."""

from .experiments import (
    ExperimentSpec,
    RequiredQueries,
    SuccessStats,
    required_queries,
    run_experiment,
    success_rate,
    transition_window,
)
from .presets import figure_spec
from .results import CSV_HEADER, ResultRow, rows_from_csv, rows_to_csv
