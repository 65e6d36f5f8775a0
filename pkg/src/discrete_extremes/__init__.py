"""Tail modeling of discrete data by peaks over threshold.

Discrete generalized Pareto (D-GPD), generalized Zipf (GZD) and
continuity-corrected GPD models, fitted by maximum likelihood.
"""
from .distributions import (
    DGPD,
    GPD,
    GZD,
    Geometric,
    InverseGamma,
    NegBinomial,
    Poisson,
    TailParams,
    baseline_pmf,
    dgpd_pmf,
    dgpd_quantile,
    dgpd_survival,
    family_from_name,
    gpd_density,
    gpd_quantile,
    gpd_survival,
    gzd_pmf,
    gzd_quantile,
    gzd_survival,
    invariance_check,
    sample,
)
from .gof import KsResult, QqData, ks_pvalue, ks_statistic, qq_points
from .mle import (
    FitOptions,
    FitResult,
    GroupedCounts,
    confint,
    fit,
    nll,
    observed_information,
)
from .pot import ExceedanceSample, TailEstimate, exceedances, select_threshold, tail_probability
from .replication import (
    births_analysis,
    poisson_intro_experiment,
    table1_experiment,
    theorem1_ratio_check,
)
from .rng import RngStream
from .special import hurwitz_zeta

__version__ = "0.1.0"
