"""Bayesian sensitivity analysis for unmeasured confounding.

Turns an E-value threshold into a posterior probability that confounding is
strong enough to explain an observed association away.
"""

from .analysis import (
    AnalysisConfig,
    CaseResult,
    SweepResult,
    analyze_batch,
    analyze_case,
    paper_reconstruction,
    rank_by_robustness,
    summarize_domains,
    sweep_prior,
)
from .bias_model import (
    Engine,
    PosteriorParams,
    PriorSpec,
    p_exceed_closed_form,
    posterior_params,
    posterior_summaries,
)
from .effect_measures import EffectEstimate, LogEstimate, Measure, measure_as_rr, to_log_estimate
from .evalue import evalue_for_ci_limit, evalue_from_ratio, ratio_from_evalue
from .ingest import CaseRecord, load_paper_cases, read_cases, write_cases
from .numerics import RandomSource
from .oracles import p_exceed_monte_carlo, p_exceed_quadrature, theta_true_quantiles

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "CaseResult",
    "SweepResult",
    "analyze_batch",
    "analyze_case",
    "paper_reconstruction",
    "rank_by_robustness",
    "summarize_domains",
    "sweep_prior",
    "Engine",
    "PosteriorParams",
    "PriorSpec",
    "p_exceed_closed_form",
    "posterior_params",
    "posterior_summaries",
    "EffectEstimate",
    "LogEstimate",
    "Measure",
    "measure_as_rr",
    "to_log_estimate",
    "evalue_for_ci_limit",
    "evalue_from_ratio",
    "ratio_from_evalue",
    "CaseRecord",
    "load_paper_cases",
    "read_cases",
    "write_cases",
    "RandomSource",
    "p_exceed_monte_carlo",
    "p_exceed_quadrature",
    "theta_true_quantiles",
]
