"""Safety filtering for multiple annulus-certified barriers under box input limits.

The library wraps any nominal controller (autonomous or human input) with a
locally Lipschitz blended safety controller that keeps every configured
constraint set forward invariant, and ships a desk-scale unicycle
obstacle-field simulator exercising the whole stack.
"""

from .barrier_core import (
    AlphaFn,
    BarrierSpec,
    BlendReport,
    DisjointnessError,
    InputBox,
    InputViolationError,
    blend_multi,
    blend_single,
    check_typeII_condition,
    kappa,
    phi,
)
from .geometry import (
    AnnulusShell,
    DegenerateShellError,
    Ellipsoid,
    annuli_disjoint,
    eta,
    eval_c,
    grad_c,
)
from .plants import (
    MechParams,
    UnicycleBarrierGains,
    aicardi_nominal,
    energy_barrier,
    energy_kh_synthesis,
    energy_safety_ctrl,
    mech_flow,
    unicycle_barrier,
    unicycle_flow,
    unicycle_gain_synthesis,
    unicycle_safety_ctrl,
    wrap_heading,
)
from .qp import (
    DegenerateConstraintError,
    QpProblem,
    QpSolution,
    lipschitz_probe,
    min_norm_us,
    solve_stacked_qp,
)
from .scenarios import (
    Scenario,
    ScenarioError,
    load_scenario,
    load_shipped_scenario,
    save_scenario,
    validate_scenario,
)
from .sim import (
    MonitorReport,
    RunResult,
    Trajectory,
    distance_to_set,
    replay_tabulated,
    rk4_step,
    run_scenario,
    run_single,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaFn",
    "AnnulusShell",
    "BarrierSpec",
    "BlendReport",
    "DegenerateConstraintError",
    "DegenerateShellError",
    "DisjointnessError",
    "Ellipsoid",
    "InputBox",
    "InputViolationError",
    "MechParams",
    "MonitorReport",
    "QpProblem",
    "QpSolution",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "Trajectory",
    "UnicycleBarrierGains",
    "aicardi_nominal",
    "annuli_disjoint",
    "blend_multi",
    "blend_single",
    "check_typeII_condition",
    "distance_to_set",
    "energy_barrier",
    "energy_kh_synthesis",
    "energy_safety_ctrl",
    "eta",
    "eval_c",
    "grad_c",
    "kappa",
    "lipschitz_probe",
    "load_scenario",
    "load_shipped_scenario",
    "mech_flow",
    "min_norm_us",
    "phi",
    "replay_tabulated",
    "rk4_step",
    "run_scenario",
    "run_single",
    "save_scenario",
    "solve_stacked_qp",
    "unicycle_barrier",
    "unicycle_flow",
    "unicycle_gain_synthesis",
    "unicycle_safety_ctrl",
    "validate_scenario",
    "wrap_heading",
]
