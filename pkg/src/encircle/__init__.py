"""Range-only target encirclement: a backstepping steering law that
drives a constant-speed unicycle so its distance to an unknown-position
target tracks any smooth commanded profile, plus the simulation,
analysis, and CLI tooling to exercise it.

The closed-loop stepping kernel is compiled (Cython) when available and
falls back to a bitwise-identical pure Python loop; see
:mod:`encircle._kernel`.
"""

from ._kernel import BACKEND as kernel_backend
from .analysis import (
    AnalysisReport,
    ErrorState,
    LinearizationReport,
    PhaseReport,
    PolarState,
    analyze,
    detect_phases,
    error_trajectory,
    fit_decay_rate,
    linearize,
    lyapunov_V3,
    lyapunov_V4,
    phi_equilibrium,
)
from .controller import (
    ConditionReport,
    ControlDiag,
    ControllerParams,
    check_constant_conditions,
    check_timevarying_conditions,
    compute_alpha,
    compute_u,
    compute_u_constant,
    sat,
)
from .estimator import WashoutState, init as washout_init, update as washout_update
from .harness import (
    BatchResult,
    InteriorEquilibriumReport,
    NumericalDivergenceError,
    Scenario,
    TrajectoryLog,
    run,
    run_batch,
    stress_interior_equilibrium,
)
from .plant import (
    NoiseModel,
    RobotState,
    TargetSet,
    measure,
    min_distance,
    step,
    true_polar,
    wrap_angle,
)
from .signals import (
    Constant,
    RefCommand,
    RefSample,
    Sinusoid,
    Sum,
    bounds,
    command_from_dict,
    evaluate,
)

__version__ = "0.1.0"
