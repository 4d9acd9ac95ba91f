"""clfopt: optimization algorithms derived by dissipating control Lyapunov
functions of the costate through a maximum-principle controller."""

__version__ = "0.1.0"

from .objectives import (
    BenchmarkProblem,
    FiniteDifferenceReport,
    ObjectiveOracle,
    finite_difference_check,
    make_benchmark,
)
from .costate import CostateState, costate_from_gradient, hamiltonian, integrate_adjoint
from .clf import (
    ActiveSet,
    BlockStructure,
    Converged,
    LyapunovFunction,
    SubgradientSelection,
    active_set,
    clf_value,
    extreme_subgradients,
    subdifferential_membership,
    unbiased_subgradient,
)
from .controller import (
    ControlOutput,
    ControlSet,
    DegenerateDriveError,
    MaxPrincipleController,
    NewtonController,
    NonSPDMetricError,
    SingularMetricError,
    max_principle_control,
    newton_control,
    verify_maximizer,
)
from .flow import DissipationReport, FlowConfig, FlowTrace, dissipation_report, run_flow
from .algorithms import (
    ControllerStep,
    RunResult,
    StepSchedule,
    reference_gauss_southwell,
    run,
    step_block_cd,
    step_cd,
    step_cd_via_controller,
    step_gradient,
    step_newton,
    step_sign_cd,
)
from .trace import IterationTrace, TraceRecord, export_trace, read_trace

__all__ = [
    "ActiveSet",
    "BenchmarkProblem",
    "BlockStructure",
    "ControlOutput",
    "ControlSet",
    "ControllerStep",
    "Converged",
    "CostateState",
    "DegenerateDriveError",
    "DissipationReport",
    "FiniteDifferenceReport",
    "FlowConfig",
    "FlowTrace",
    "IterationTrace",
    "LyapunovFunction",
    "MaxPrincipleController",
    "NewtonController",
    "NonSPDMetricError",
    "ObjectiveOracle",
    "RunResult",
    "SingularMetricError",
    "StepSchedule",
    "SubgradientSelection",
    "TraceRecord",
    "active_set",
    "clf_value",
    "costate_from_gradient",
    "dissipation_report",
    "export_trace",
    "extreme_subgradients",
    "finite_difference_check",
    "hamiltonian",
    "integrate_adjoint",
    "make_benchmark",
    "max_principle_control",
    "newton_control",
    "read_trace",
    "reference_gauss_southwell",
    "run",
    "run_flow",
    "step_block_cd",
    "step_cd",
    "step_cd_via_controller",
    "step_gradient",
    "step_newton",
    "step_sign_cd",
    "subdifferential_membership",
    "unbiased_subgradient",
    "verify_maximizer",
]
