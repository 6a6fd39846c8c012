"""Learning linear operators with bounded Schatten p-norm from sample pairs."""

from .complexity import (
    GrowthFit,
    RademacherConfig,
    mc_growth,
    random_op_norms,
    sup_loss,
    theorem_bounds,
)
from .datagen import ScenarioSpec, make_ground_truth, sample_pair, sample_pairs, tikhonov_truth
from .erm import (
    BasisPair,
    CoordinateProblem,
    FitReport,
    TrainingSet,
    build_basis,
    coordinates,
    empirical_risk,
    fit,
    lift,
    solve_erm,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    InvalidInputError,
    SchattenError,
    ShapeError,
    UnsupportedOrderError,
)
from .experiments import RiskCurveConfig, RiskCurveRow, oracle_risk, risk_curve, slope_fit
from .operators import (
    LinearOperator,
    SchattenBall,
    adjoint,
    apply,
    compose,
    rank1,
    schatten_norm,
    svd_spectrum,
    trace,
)
from .projection import LpBall, is_member, project_lp, project_schatten

__version__ = "0.1.0"
