"""Uncertainty measures for finitely generated credal sets.

Total, aleatoric and epistemic uncertainty under the total-variation test
class, entropy and generalized-Hartley baselines, and an accuracy-rejection
harness for selective prediction.
"""

from .baselines import (
    HARTLEY_K_MAX,
    HartleyUnavailable,
    entropy_epistemic,
    entropy_lower,
    entropy_upper,
    generalized_hartley,
    hartley_aleatoric,
    moebius_transform,
    shannon_entropy,
)
from .ingest import (
    DatasetError,
    Instance,
    PredictionDataset,
    filter_by_relative_likelihood,
    inject_dirac_member,
    load_csv,
    load_jsonl,
)
from .measures import (
    AUInterval,
    UncertaintyRecord,
    au_tv_lower,
    au_tv_precise,
    au_tv_upper,
    eu_tv,
    evaluate_tv,
    tu_tv,
)
from .optimize import SolveReport, SolverError, SolverWarning, maximize_entropy_over_hull, minimax_max_coordinate
from .selective import (
    ARCurve,
    ScoredInstance,
    accuracy_rejection_curve,
    auc,
    credal_predict,
    monotonicity_ratio,
    rank_by_uncertainty,
)
from .simplex import (
    CredalSet,
    Distribution,
    EnvelopePair,
    SimplexError,
    lower_probability,
    singleton_envelopes,
    tv_distance,
    upper_probability,
)
from .synthetic import SyntheticConfig, generate

__version__ = "0.1.0"
