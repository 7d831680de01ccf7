"""Conditional-risk calibration toolkit.

Estimates the conditional risk g(x) = E[loss(f(X), Y) | X = x] of a fixed
predictor, by regressing on realized sample losses or by plugging estimated
class probabilities into a per-class loss vector, and evaluates both routes
in a regression-with-rejection / learning-to-defer benchmark harness.
"""

from .data import (
    Dataset,
    Standardizer,
    SplitPlan,
    SyntheticSpec,
    load_csv,
    write_csv,
    fit_standardizer,
    apply_standardizer,
    make_split_plans,
    generate_synthetic,
    load_manifest,
)
from .models import ModelSpec, Predictor, TrainReport, fit, gradient_check
from .riskcal import (
    LossFn,
    CalibReport,
    RiskCalibrator,
    sample_losses,
    fit_regression_calibrator,
    fit_plugin_calibrator,
    plugin_risk,
    fit_temperature,
    calib_error,
)
from .defer import (
    Rejector,
    DeferReport,
    evaluate_rwr,
    evaluate_precomputed,
    evaluate_l2d_classification,
    sweep_costs,
)
from .experiment import (
    ConfigError,
    RwRConfig,
    ClassifyConfig,
    GridOutcome,
    load_rwr_config,
    load_classify_config,
    run_grid,
    run_classify,
    read_results,
    render_report,
    export_plot_data,
)
from .verify import (
    TheoryCheckResult,
    brier_identity_check,
    realizability_exactness,
    separable_comparison,
    run_all_checks,
)

__version__ = "0.1.0"
