"""Pointwise-competitive selective classification and disagreement-based
active learning on exactly solvable 1-D hypothesis classes."""

from .active import (
    ActiveRunReport,
    SampleStream,
    StreamSource,
    label_complexity_curve,
    run_active_iless,
    run_batch_iless,
)
from .disagreement import ThetaEstimate, ball_disagreement_mass, theta_class, theta_f
from .hypotheses import (
    NEGATIVE,
    POSITIVE,
    FiniteSpace,
    Hypothesis,
    IntervalSpace,
    LabeledSample,
    Member,
    ThresholdSpace,
    UnsupportedError,
    all_erms,
    constrained_erm,
    empirical_risk,
    erm,
    predict,
)
from .selective import (
    ABSTAIN,
    LowErrorSet,
    SelectiveClassifier,
    classify,
    empirical_coverage,
    exact_abstain_mass,
    train_iless,
    train_less,
)
from .worlds import (
    SyntheticWorld,
    all_true_minimizers,
    example1_world,
    interval_world,
    sample,
    threshold_world,
    true_risk,
)

__version__ = "0.1.0"
