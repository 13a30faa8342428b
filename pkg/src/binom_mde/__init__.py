"""Minimum-distance estimation of the binomial success probability."""

__version__ = "0.1.0"

from .binomial_model import (BinomialModel, cdf, cdf_beta_integral,
                             coefficient_c, pmf)
from .estimators import (DisparityParams, EstimateResult, Method, Sample,
                         WeightVector, cvm_distance, estimate_e, estimate_md,
                         estimate_ml, likelihood_disparity, minimize_scalar,
                         rho)
from .asymptotics import (asymptotic_summary, asymptotic_variance_md,
                          asymptotic_variance_ml, confidence_interval,
                          covariance_C, gamma, influence_md, influence_md_bound,
                          influence_ml,
                          variance_curve)
from .sampling import (ContaminatedModel, contaminated_cdf, derive_stream,
                       sample_binomial, sample_contaminated)
from .montecarlo import (CellSummary, ExperimentConfig, run_cell,
                         run_experiment, summarize)
