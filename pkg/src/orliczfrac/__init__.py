"""Fractional growth-function modulars, nonlocal-to-local limits, solver."""

from .errors import (
    ConfigError,
    DegenerateMollifierWarning,
    DivergentModularError,
    InvalidFunctionError,
    InvalidInputError,
    InvalidParameterError,
    NumericOverflowError,
    OrliczFracError,
    ToleranceNotMetError,
    UndefinedRatioError,
    UniquenessWarning,
    UnsupportedDimensionError,
)
from .fractional import fractional_modular, fractional_modular_with_gradient
from .grid import (
    GridFunction,
    QuadratureConfig,
    gradient_modular,
    luxemburg_norm,
    modular,
    mollify,
    translate,
    truncate,
)
from .limit_density import (
    LimitDensity,
    ball_volume,
    equivalence_constants,
    limit_density,
    sphere_log_moment,
    sphere_moment,
    sphere_surface,
    tilde_closed_form,
    tilde_eval,
    tilde_prelimit,
)
from .limits import (
    LimitCurve,
    PoincareReport,
    SequenceLimitReport,
    bbm_curve,
    poincare_budget,
    poincare_check,
    sequence_limit_demo,
)
from .orlicz import (
    OrliczFunction,
    OrliczReport,
    compose,
    conjugate,
    estimate_constants,
    make_combination,
    make_custom,
    make_power,
    make_power_abslog,
    make_power_log,
    verify_orlicz,
)
from .solver import (
    DirichletProblem,
    GammaReport,
    SolveOptions,
    SolveResult,
    apply_pointwise_eps,
    energy,
    energy_gradient,
    gamma_run,
    pairing_abs,
    solve,
    weak_residual,
)

__version__ = "0.1.0"
