"""Bootstrap inference for predictive regressions with a constrained parameter space."""

from .asymptotics import (
    BrownianMotion,
    FixedM,
    LimitConfig,
    LimitDraw,
    OrnsteinUhlenbeck,
    draw_bootstrap_limit,
    draw_original_limit,
    project_halfplane,
    simulate_M,
)
from .constrained_ls import (
    BoundaryNull,
    ConstraintSpec,
    EstimationError,
    FitResult,
    NewtonConvergenceError,
    SimpleNull,
    SingularDesignError,
    SmoothNull,
    fit_constrained,
    fit_unconstrained,
    statistic_value,
)
from .dgp import (
    Arch1,
    CorrelatedWithRegressor,
    Fixed,
    IidNormal,
    LocalDrift,
    LocalToBoundary,
    NearUnitRoot,
    Stationary,
    TimeSeriesSample,
    UnitRoot,
    generate_errors,
    generate_sample,
)
from .location_model import (
    LocSample,
    loc_bootstrap_cdf,
    loc_corrected_bootstrap_shift,
    loc_fit,
    loc_one_sided_p,
)
from .montecarlo import (
    CellKey,
    CellSpec,
    ErpCell,
    ExperimentPlan,
    preset,
    run_experiment,
    slope_constraint,
    sum_hypothesis,
)
from .rng import derive_stream
from .wild_bootstrap import (
    BootstrapRun,
    SchemeSpec,
    bootstrap_estimate,
    bootstrap_threshold,
    conservative_sup_p,
    generate_bootstrap_sample,
    run_bootstrap,
)

__version__ = "0.1.0"
