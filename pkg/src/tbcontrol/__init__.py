"""Optimal control of a two-strain-latency tuberculosis model.

The package splits into five layers: model (compartmental dynamics and
parameter handling), reproduction (basic reproduction number and
sensitivity), integrator (fixed-step RK4 in both directions), optimizer
(cost, costates and the forward-backward sweep) and harness (scenario
catalog, config files, CSV/JSON output and the CLI).
"""

from .errors import (
    ConfigError,
    DivergenceError,
    InvalidInputError,
    NumericalError,
    TbControlError,
)
from .model import (
    INITIAL_SHARES,
    PARAMETER_FIELDS,
    ControlValue,
    Parameters,
    State,
    default_parameters,
    dfe,
    initial_state,
    rhs,
)
from .reproduction import (
    R0Report,
    SensitivityIndex,
    r0_closed_form,
    r0_ngm,
    r0_report,
    sensitivity_beta,
    sensitivity_numeric,
    sensitivity_u1,
)
from .integrator import (
    AdjointTrajectory,
    ControlGrid,
    TimeGrid,
    Trajectory,
    rk4_backward,
    rk4_forward,
)
from .optimizer import (
    CostKind,
    CostWeights,
    SolveResult,
    SweepConfig,
    adjoint_rhs,
    adjoint_system,
    characterize_controls,
    cost,
    fbs_solve,
    hamiltonian,
    state_system,
    upper_bound_duration,
)
from .harness import (
    ScenarioOutcome,
    ScenarioSpec,
    apply_overrides,
    builtin_names,
    builtin_scenarios,
    default_spec,
    get_scenario,
    load_config,
    run_catalog,
    run_scenario,
    run_sweep,
    save_config,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "TbControlError",
    "InvalidInputError",
    "ConfigError",
    "DivergenceError",
    "NumericalError",
    "Parameters",
    "State",
    "ControlValue",
    "PARAMETER_FIELDS",
    "INITIAL_SHARES",
    "rhs",
    "dfe",
    "default_parameters",
    "initial_state",
    "R0Report",
    "SensitivityIndex",
    "r0_closed_form",
    "r0_ngm",
    "r0_report",
    "sensitivity_beta",
    "sensitivity_u1",
    "sensitivity_numeric",
    "TimeGrid",
    "Trajectory",
    "AdjointTrajectory",
    "ControlGrid",
    "rk4_forward",
    "rk4_backward",
    "CostKind",
    "CostWeights",
    "SweepConfig",
    "SolveResult",
    "cost",
    "hamiltonian",
    "adjoint_rhs",
    "adjoint_system",
    "state_system",
    "characterize_controls",
    "fbs_solve",
    "upper_bound_duration",
    "ScenarioSpec",
    "ScenarioOutcome",
    "builtin_scenarios",
    "builtin_names",
    "get_scenario",
    "default_spec",
    "run_scenario",
    "run_sweep",
    "run_catalog",
    "write_csv",
    "load_config",
    "save_config",
    "apply_overrides",
    "__version__",
]
