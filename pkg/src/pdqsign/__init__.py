"""Pairwise-difference-quantile spatial-sign two-sample location test."""

from .baselines import SstFit, sst_fit, sst_statistic, sst_test
from .bootstrap import BootstrapResult, bootstrap_draw, bootstrap_draws, calibrate, tau_star
from .elliptical import (
    PopulationSpec,
    RadialSpec,
    ShapeSpec,
    make_shape,
    population_pdq_quantile,
    population_sign_moments,
    sample_population,
)
from .kernels import BACKEND
from .pdq import DiagonalScale, estimate_diag, pairwise_quantile
from .pipeline import TestOutcome, pdq_test
from .spatial import MedianOptions, SpatialFit, fit, geometric_median
from .statistic import (
    KMatrices,
    OracleNull,
    TestStatistic,
    compute_K,
    compute_statistic,
    oracle_null,
    oracle_U_statistic,
    sample_gamma,
)

__version__ = "0.1.0"
