"""Benchmarks for weak-value amplification against likelihood-based
estimation and detection, with an information-budget audit."""

from .config import (
    ExperimentConfig,
    config_from_table,
    config_hash,
    load_config,
    with_sweep_value,
)
from .detection import (
    DetectionReport,
    categorical_lr_split,
    chi2_quantile,
    chi2_test,
    detect,
    expected_d,
    expected_d_total,
    lr_statistic,
)
from .errors import (
    BadAlpha,
    BadBins,
    BadParams,
    BadVariance,
    ComplexWeakValue,
    ConfigError,
    DegenerateOverlap,
    IoError,
    NegligibleProbability,
    NoPostselectedEvents,
    NotNormalized,
    NotPSD,
    TooFewSamples,
    WvaBenchError,
    ZeroInformation,
)
from .estimators import (
    Dataset,
    EstimateReport,
    mle,
    smle,
    smle_variance,
    snr,
    total_variance_prediction,
    wva,
)
from .fisher import (
    JointModel,
    QfiReport,
    chernoff_bound,
    evolve_joint,
    fi_decomposition,
    kraus_family,
    postselected_qfi,
    qfi_pure,
)
from .harness import (
    RunResult,
    derive_trial_seed,
    emit_results,
    run_experiment,
    sweep,
)
from .noise import (
    NoiseCovariance,
    build_covariance,
    sample_covariance_estimate,
    sample_noise,
)
from .quantum import (
    CouplingConfig,
    JointSampler,
    MeterSpec,
    Observable,
    OrthonormalBasis,
    PureState,
    expected_O_squared,
    outcome_probs,
    sample_joint,
    weak_value,
    weak_value_vector,
)

__version__ = "0.1.0"
