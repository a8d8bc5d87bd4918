"""Proximal bridge regression toolkit.

Closed-form/fixed-point bridge estimators in primal and dual form with
multi-output support, ridge/OLS/elastic-net baselines, dataset tooling, and
a benchmark harness for the desk-scale case studies.
"""

from .baselines import EnetConfig, NotConverged, enet_path_grid, fit_elastic_net, fit_lasso
from .datasets import (
    Dataset,
    OutOfRangeLabel,
    ParseError,
    RaggedRows,
    SimSpec,
    Standardization,
    apply_standardization,
    destandardize,
    gen_sim,
    gen_xor_test,
    gen_xor_train,
    load_csv,
    load_prostate,
    one_hot,
    poly3_features,
    sim_spec,
    standardize,
)
from .estimators import (
    BridgeConfig,
    BridgeRegression,
    CoefficientSet,
    DivergedFixedPoint,
    InvalidK,
    OrdinaryLeastSquares,
    RidgeRegression,
    bridge_objective,
    check_invertibility_condition,
    fit_lqa,
    fit_ols,
    fit_pbridge,
    fit_pbridge_dual,
    fit_pbridge_primal,
    fit_ridge,
    k_measure,
    stationarity_residual,
)
from .evaluation import (
    BenchReport,
    BiasResult,
    CvReport,
    PathTrace,
    accuracy_wta,
    canonical_json,
    coefficient_path,
    count_nonzero,
    cross_validate,
    effective_df,
    empirical_bias,
    make_method,
    monte_carlo_bench,
    prediction_mse,
    weighted_mse,
)
from .linalg import (
    NonSymmetric,
    SingularSystem,
    abs_pow_mat,
    min_eigenvalue,
    signed_pow,
    solve_regularized,
)

__version__ = "0.1.0"
