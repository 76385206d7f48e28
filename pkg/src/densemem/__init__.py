"""densemem: dense associative memory simulation and capacity experiments.

Three retrieval dynamics over +/-1 configurations (classical pairwise,
degree-n polynomial interaction, exponential interaction), a deterministic
Monte Carlo harness for storage-capacity and basin-of-attraction sweeps,
closed-form threshold curves, and an sklearn-style estimator facade.
"""

__version__ = "0.1.0"

from .dynamics import (
    CLASSICAL,
    EXPONENTIAL,
    KEEP_CURRENT,
    PLUS_ONE,
    POLYNOMIAL,
    FixedPointResult,
    ModelSpec,
    NetworkState,
    UpdateDecision,
    asynchronous_pass,
    classical_local_field,
    decide_update,
    exp_delta_energy_sign,
    exp_signal_noise_logs,
    polynomial_local_field,
    run_to_fixed_point,
    synchronous_step,
)
from .estimator import DenseAssociativeMemory
from .experiments import (
    CSV_HEADER,
    SweepPoint,
    SweepResult,
    TrialProfile,
    TrialResult,
    TrialSpec,
    error_fraction_experiment,
    results_to_csv,
    run_sweep,
    run_trial,
    signal_noise_profile,
    wilson_interval,
)
from .patterns import (
    Pattern,
    PatternStore,
    corrupt_in_ball,
    corrupt_on_sphere,
    generate_patterns,
    hamming_distance,
    load_store,
    overlap,
    save_store,
    store_from_text,
    store_to_text,
)
from .seeding import SeedSpec, derive_seed
from .theory import (
    ThresholdReport,
    alpha_star,
    binomial_tail_bound,
    capacity_constant,
    double_factorial,
    empirical_rademacher_rate,
    gaussian_even_moment,
    polynomial_capacity,
    rademacher_exact_tail,
    rademacher_tail_bound,
    rate_function,
    threshold_report,
)

__all__ = [
    "__version__",
    "CLASSICAL",
    "POLYNOMIAL",
    "EXPONENTIAL",
    "KEEP_CURRENT",
    "PLUS_ONE",
    "ModelSpec",
    "NetworkState",
    "UpdateDecision",
    "FixedPointResult",
    "classical_local_field",
    "polynomial_local_field",
    "exp_delta_energy_sign",
    "exp_signal_noise_logs",
    "decide_update",
    "synchronous_step",
    "asynchronous_pass",
    "run_to_fixed_point",
    "DenseAssociativeMemory",
    "Pattern",
    "PatternStore",
    "generate_patterns",
    "corrupt_on_sphere",
    "corrupt_in_ball",
    "overlap",
    "hamming_distance",
    "save_store",
    "load_store",
    "store_to_text",
    "store_from_text",
    "SeedSpec",
    "derive_seed",
    "rate_function",
    "alpha_star",
    "double_factorial",
    "capacity_constant",
    "gaussian_even_moment",
    "polynomial_capacity",
    "binomial_tail_bound",
    "rademacher_tail_bound",
    "rademacher_exact_tail",
    "empirical_rademacher_rate",
    "ThresholdReport",
    "threshold_report",
    "TrialSpec",
    "TrialResult",
    "SweepPoint",
    "SweepResult",
    "TrialProfile",
    "run_trial",
    "run_sweep",
    "error_fraction_experiment",
    "signal_noise_profile",
    "wilson_interval",
    "results_to_csv",
    "CSV_HEADER",
]
