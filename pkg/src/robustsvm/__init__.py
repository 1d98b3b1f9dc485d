"""Robust-optimization formulations of support vector machines, their
equivalence to norm-regularized training, probabilistic budget
calibration, and the pairing-based generalization laboratory."""

__version__ = "0.1.0"

from .core import (
    Dataset,
    LabeledSample,
    LinearClassifier,
    NormSpec,
    classification_error,
    decision_values,
    dual,
    dual_norm,
    empirical_hinge,
    hinge_loss,
    norm_value,
    predict,
    signed_margins,
)
from .uncertainty import (
    SINGLE_SHIFT,
    SQRT_BUDGET,
    SUM_BUDGET,
    AtomicSet,
    BoxSet,
    SublinearSet,
    brute_force_worst_case,
    has_negative_margin,
    support_function,
    validate_atomic,
    worst_case_loss_lower,
    worst_case_loss_upper,
)
from .reduction import (
    RegularizedProblem,
    Regularizer,
    box_robust_objective,
    conservatism_gap,
    robust_objective,
    robustify,
)
from .solver import (
    SolverConfig,
    TrainResult,
    check_separability,
    grid_oracle,
    objective_subgradient,
    objective_value,
    train_regularized,
    train_robust,
)
from .kernel import (
    KernelClassifier,
    KernelSpec,
    feature_distance,
    gram,
    kernel_eval,
    rbf_feature_radius,
    rkhs_norm,
    sample_space_sup,
    train_kernel_regularized,
    verify_smoothness_condition,
)
from .probabilistic import (
    BudgetPrior,
    DisturbanceModel,
    ball_model,
    bayes_regularizer,
    calibrate_chance,
    chance_bound_check,
    gaussian_model,
    point_mass_model,
    uniform_budget_model,
)
from .consistency import (
    BoundReport,
    PairingResult,
    TrendReport,
    brick_pairing_lower_bound,
    generalization_bound,
    kernel_generalization_bound,
    max_pairings_exact,
    run_consistency_experiment,
)
from .data import (
    LoadResult,
    gaussian_blobs,
    generate_synthetic,
    load_dataset,
    replicated_with_noise,
    save_dataset,
)
