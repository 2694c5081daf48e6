"""Surrogate Monte Carlo: artificial time series from annealed permutations of
empirical i.i.d. draws."""

__version__ = "0.1.0"

from .anneal import (AnnealConfig, AnnealReport, anneal_run, auto_initial_temperature,
                     run_realizations)
from .diagnostics import (PANEL_COLUMNS, AcfPanel, PhaseDiagram, acf_panels, ar1_generate,
                          period_average, phase_diagram, radial_rms, sine_generate, sv_generate,
                          theoretical_ar1_acf, write_tsv)
from .empirical import (EmpiricalDistribution, SampleDraw, fit_empirical_cdf, folded_cdf,
                        inverse_transform, ks_at_knots, make_rng, sample_iid, spawn_seeds)
from .features import (DegenerateSeriesError, FeatureSpec, FeatureVector, ObjectiveState,
                       Term, apply_swap, confidence_band, cross_correlation,
                       init_objective_state, objective_delta, rho, swap_delta)
from .ingest import (PriceSeries, ReturnSeries, demean, log_returns, parse_price_csv, read_series,
                     write_series)

__all__ = [
    "PANEL_COLUMNS", "AcfPanel", "AnnealConfig", "AnnealReport", "DegenerateSeriesError",
    "EmpiricalDistribution", "FeatureSpec", "FeatureVector", "ObjectiveState",
    "PhaseDiagram", "PriceSeries", "ReturnSeries", "SampleDraw", "Term",
    "acf_panels", "anneal_run", "apply_swap", "ar1_generate", "auto_initial_temperature",
    "confidence_band", "cross_correlation", "demean", "fit_empirical_cdf", "folded_cdf",
    "init_objective_state", "inverse_transform", "ks_at_knots", "log_returns", "make_rng",
    "objective_delta", "parse_price_csv", "period_average", "phase_diagram",
    "radial_rms", "read_series", "rho", "run_realizations", "sample_iid", "sine_generate",
    "spawn_seeds", "sv_generate", "swap_delta", "theoretical_ar1_acf", "write_series",
    "write_tsv",
]
