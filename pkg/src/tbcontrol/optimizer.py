"""Optimal-control core: cost, Hamiltonian, costates and the sweep solver.

The control problem minimizes an integral cost over [t_start, t_end]
subject to the compartmental dynamics in model.rhs. Two cost variants are
supported: one counts both active cases and persistent latents in the
running cost, the other counts active cases only. Both add quadratic
control penalties (w1/2)*u1^2 + (w2/2)*u2^2.

fbs_solve implements the forward-backward sweep: integrate the states
forward under the current controls, integrate the costates backward from
zero terminal values, build the pointwise minimizer of the Hamiltonian,
and relax the controls toward it with a convex combination. The returned
states, costates and controls all correspond to the final control
iterate, so the optimality conditions can be checked directly on the
result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace as dc_replace

import numpy as np

from . import _kernels
from .errors import DivergenceError, InvalidInputError
from .integrator import AdjointTrajectory, ControlGrid, TimeGrid, Trajectory
from .model import ControlValue, Parameters, State, rhs

__all__ = [
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
]


class CostKind(str, enum.Enum):
    """Which compartments enter the running cost."""

    I_PLUS_L2 = "i_plus_l2"
    I_ONLY = "i_only"


@dataclass(frozen=True)
class CostWeights:
    """Relative intervention costs for the two quadratic control penalties."""

    w1: float
    w2: float

    def __post_init__(self):
        for name in ("w1", "w2"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise InvalidInputError(f"weight {name} must be a positive real, got {v!r}")
            object.__setattr__(self, name, float(v))


@dataclass(frozen=True)
class SweepConfig:
    """Tunables of the forward-backward sweep.

    theta is the relaxation weight of the control update
    u <- theta*u_characterized + (1-theta)*u_previous. The iteration stops
    when, for every tracked vector (five states, five costates, both
    controls), the L1 norm of the change is at most tolerance times the
    L1 norm of the new iterate. The enable flags pin a control at its
    initial value, which runs the same sweep restricted to the remaining
    control (or to plain simulation when both are pinned).
    """

    theta: float = 0.5
    tolerance: float = 1e-4
    max_iterations: int = 500
    grid: TimeGrid = field(default_factory=lambda: TimeGrid(0.0, 5.0, 5000))
    initial_u1: float = 0.0
    initial_u2: float = 0.0
    u1_enabled: bool = True
    u2_enabled: bool = True

    def __post_init__(self):
        if not isinstance(self.theta, (int, float)) or not 0 < self.theta <= 1:
            raise InvalidInputError(f"theta must lie in (0, 1], got {self.theta!r}")
        if not isinstance(self.tolerance, (int, float)) or not self.tolerance > 0:
            raise InvalidInputError(f"tolerance must be positive, got {self.tolerance!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be a positive integer")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))
        for name in ("initial_u1", "initial_u2"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not 0 <= v <= 1:
                raise InvalidInputError(f"{name} must lie in [0, 1], got {v!r}")

    def replace(self, **changes) -> "SweepConfig":
        return dc_replace(self, **changes)


@dataclass(frozen=True)
class SolveResult:
    """Final aligned iterate of the sweep plus convergence bookkeeping."""

    states: Trajectory
    adjoints: AdjointTrajectory
    controls: ControlGrid
    cost_value: float
    iterations: int
    converged: bool

    @property
    def terminal_infected(self) -> float:
        """Active plus persistent-latent population at the final time."""
        y = self.states.terminal
        return float(y[2] + y[3])

    @property
    def u1_upper_duration(self) -> float:
        return upper_bound_duration(self.controls.values[:, 0], self.states.grid.h)

    @property
    def u2_upper_duration(self) -> float:
        return upper_bound_duration(self.controls.values[:, 1], self.states.grid.h)


def _state_values(state) -> tuple:
    if isinstance(state, State):
        return state.s, state.l1, state.i, state.l2, state.r
    a = np.asarray(state, dtype=float)
    if a.shape != (5,):
        raise InvalidInputError(f"state must have five components, got shape {a.shape}")
    return tuple(a.tolist())


def _control_values(control) -> tuple:
    if isinstance(control, ControlValue):
        return control.u1, control.u2
    a = np.asarray(control, dtype=float)
    if a.shape != (2,):
        raise InvalidInputError(f"control must have two components, got shape {a.shape}")
    return a[0], a[1]


def _running_cost(i, l2, u1, u2, weights: CostWeights, kind: CostKind):
    base = i + l2 if kind == CostKind.I_PLUS_L2 else i
    return base + 0.5 * weights.w1 * u1 * u1 + 0.5 * weights.w2 * u2 * u2


def cost(states: Trajectory, controls: ControlGrid, weights: CostWeights,
         kind: CostKind = CostKind.I_PLUS_L2) -> float:
    """Composite-trapezoid value of the objective along a trajectory."""
    if states.grid != controls.grid:
        raise InvalidInputError("states and controls live on different grids")
    ys = states.values
    u = controls.values
    integrand = _running_cost(ys[:, 2], ys[:, 3], u[:, 0], u[:, 1], weights, CostKind(kind))
    return float(np.trapezoid(integrand, dx=states.grid.h))


def hamiltonian(state, adjoint, control, params: Parameters, weights: CostWeights,
                kind: CostKind = CostKind.I_PLUS_L2) -> float:
    """Running cost plus the costate-weighted dynamics at one point."""
    s, l1, i, l2, r = _state_values(state)
    u1, u2 = _control_values(control)
    lam = np.asarray(adjoint, dtype=float)
    if lam.shape != (5,):
        raise InvalidInputError(f"adjoint must have five components, got shape {lam.shape}")
    dyn = rhs(State(s, l1, i, l2, r), ControlValue(u1, u2), params)
    return float(_running_cost(i, l2, u1, u2, weights, CostKind(kind)) + lam @ dyn)


def adjoint_rhs(state, adjoint, control, params: Parameters,
                kind: CostKind = CostKind.I_PLUS_L2) -> np.ndarray:
    """Time derivative of the five costates.

    Equals minus the state-gradient of the Hamiltonian. ``state`` may be a
    State or any five-vector (the backward integrator feeds interval
    midpoints, which need not satisfy the State invariants).
    """
    s, l1, i, l2, r = _state_values(state)
    u1, u2 = _control_values(control)
    lam = np.asarray(adjoint, dtype=float)
    if lam.shape != (5,):
        raise InvalidInputError(f"adjoint must have five components, got shape {lam.shape}")
    values = (s, l1, i, l2, r, u1, u2, *lam.tolist())
    if not all(math.isfinite(v) for v in values):
        raise InvalidInputError("adjoint_rhs requires finite inputs")
    p = params
    m1, m2, m3, m4, m5 = lam.tolist()
    foi = p.beta * i / p.n_total
    d1 = m1 * (foi + p.mu) - m2 * foi
    d2 = (
        m2 * (p.delta + p.tau1 + p.mu)
        - m3 * p.phi * p.delta
        - m4 * (1 - p.phi) * p.delta
        - m5 * p.tau1
    )
    d3 = (
        -1.0
        + m1 * p.beta * s / p.n_total
        - m2 * p.beta * (s + p.sigma * l2 + p.sigma_r * r) / p.n_total
        + m3 * (p.tau0 + p.eps1 * u1 + p.mu)
        + m4 * p.sigma * p.beta * l2 / p.n_total
        - m5 * (p.tau0 + p.eps1 * u1 - p.sigma_r * p.beta * r / p.n_total)
    )
    src4 = -1.0 if CostKind(kind) == CostKind.I_PLUS_L2 else 0.0
    d4 = (
        src4
        - m2 * foi * p.sigma
        - m3 * p.omega
        + m4 * (p.sigma * foi + p.omega + p.eps2 * u2 + p.tau2 + p.mu)
        - m5 * (p.tau2 + p.eps2 * u2)
    )
    d5 = (
        -m2 * p.sigma_r * foi
        - m3 * p.omega_r
        + m5 * (p.sigma_r * foi + p.omega_r + p.mu)
    )
    return np.array([d1, d2, d3, d4, d5])


def state_system(params: Parameters):
    """Adapt model.rhs to the f(t, y, u) signature of rk4_forward."""

    def f(t, y, u):
        return rhs(State.from_array(y), ControlValue(u[0], u[1]), params)

    return f


def adjoint_system(params: Parameters, kind: CostKind = CostKind.I_PLUS_L2):
    """Adapt adjoint_rhs to the g(t, lam, x, u) signature of rk4_backward."""

    def g(t, lam, x, u):
        return adjoint_rhs(x, lam, u, params, kind)

    return g


def characterize_controls(state, adjoint, params: Parameters,
                          weights: CostWeights) -> ControlValue:
    """Pointwise minimizer of the Hamiltonian over [0, 1]^2.

    The Hamiltonian is separable and strictly convex in each control, so
    the minimizer is the unconstrained stationary point clamped to the
    box.
    """
    _, _, i, l2, _ = _state_values(state)
    lam = np.asarray(adjoint, dtype=float)
    if lam.shape != (5,):
        raise InvalidInputError(f"adjoint must have five components, got shape {lam.shape}")
    u1 = min(max(params.eps1 * i * (lam[2] - lam[4]) / weights.w1, 0.0), 1.0)
    u2 = min(max(params.eps2 * l2 * (lam[3] - lam[4]) / weights.w2, 0.0), 1.0)
    return ControlValue(u1, u2)


def upper_bound_duration(track, h: float, threshold: float = 0.99) -> float:
    """Total length of grid intervals whose both endpoints are >= threshold.

    ``track`` holds one control's node values, ``h`` the node spacing in
    years. With threshold 0.99 this measures the time a bang-bang style
    control spends at its upper bound; the answer is exact to within one
    interval of the true crossing times.
    """
    if not 0 < threshold < 1:
        raise InvalidInputError(f"threshold must lie in (0, 1), got {threshold!r}")
    a = np.asarray(track, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise InvalidInputError("track must be a 1-d array with at least two nodes")
    at_bound = a >= threshold
    count = int(np.count_nonzero(at_bound[:-1] & at_bound[1:]))
    return count * h


def _run_kernel_forward(y0, h, n, u, p, iteration):
    ys, bad = _kernels.forward_sweep(y0, h, n, u, p)
    if bad >= 0:
        raise DivergenceError(
            f"forward sweep produced a non-finite value at node {bad}"
            f" (iteration {iteration})",
            step=bad,
        )
    return ys


def _run_kernel_backward(h, n, ys, u, p, l2_in_cost, iteration):
    lam, bad = _kernels.backward_sweep(np.zeros(5), h, n, ys, u, p, l2_in_cost)
    if bad >= 0:
        raise DivergenceError(
            f"backward sweep produced a non-finite value at node {bad}"
            f" (iteration {iteration})",
            step=bad,
        )
    return lam


def fbs_solve(params: Parameters, initial, weights: CostWeights,
              kind: CostKind = CostKind.I_PLUS_L2,
              config: SweepConfig | None = None) -> SolveResult:
    """Solve the two-control problem by forward-backward sweeping.

    ``initial`` is the state at t_start (State or five-vector) and must
    sum to params.n_total within 1e-6 relative, since the dynamics keep
    the total only on that manifold. Non-convergence within
    max_iterations is reported through the converged flag, not raised;
    integration blow-up raises DivergenceError.
    """
    cfg = config if config is not None else SweepConfig()
    y0 = initial.to_array() if isinstance(initial, State) else np.asarray(initial, dtype=float)
    if y0.shape != (5,):
        raise InvalidInputError(f"initial state must have five components, got {y0.shape}")
    if not np.isfinite(y0).all() or y0.min() < 0:
        raise InvalidInputError("initial state must be finite and non-negative")
    total = float(y0.sum())
    if abs(total - params.n_total) > 1e-6 * params.n_total:
        raise InvalidInputError(
            f"initial state sums to {total}, expected n_total = {params.n_total}"
        )
    kind = CostKind(kind)
    l2_in_cost = kind == CostKind.I_PLUS_L2

    grid = cfg.grid
    n = grid.n_steps
    h = grid.h
    p = params.to_array()
    u = np.empty((grid.n_nodes, 2))
    u[:, 0] = cfg.initial_u1
    u[:, 1] = cfg.initial_u2

    ys = _run_kernel_forward(y0, h, n, u, p, 0)
    lam = _run_kernel_backward(h, n, ys, u, p, l2_in_cost, 0)

    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        u1_char = np.clip(params.eps1 * ys[:, 2] * (lam[:, 2] - lam[:, 4]) / weights.w1, 0.0, 1.0)
        u2_char = np.clip(params.eps2 * ys[:, 3] * (lam[:, 3] - lam[:, 4]) / weights.w2, 0.0, 1.0)
        u_new = u.copy()
        if cfg.u1_enabled:
            u_new[:, 0] = cfg.theta * u1_char + (1.0 - cfg.theta) * u[:, 0]
        if cfg.u2_enabled:
            u_new[:, 1] = cfg.theta * u2_char + (1.0 - cfg.theta) * u[:, 1]
        ys_new = _run_kernel_forward(y0, h, n, u_new, p, iterations)
        lam_new = _run_kernel_backward(h, n, ys_new, u_new, p, l2_in_cost, iterations)

        # Relative L1 change per track, written without divisions so that
        # identically-zero tracks (e.g. a disabled control) pass trivially.
        ok = True
        for k in range(5):
            if np.abs(ys_new[:, k] - ys[:, k]).sum() > cfg.tolerance * np.abs(ys_new[:, k]).sum():
                ok = False
            if np.abs(lam_new[:, k] - lam[:, k]).sum() > cfg.tolerance * np.abs(lam_new[:, k]).sum():
                ok = False
        for k in range(2):
            if np.abs(u_new[:, k] - u[:, k]).sum() > cfg.tolerance * np.abs(u_new[:, k]).sum():
                ok = False
        ys, lam, u = ys_new, lam_new, u_new
        if ok:
            converged = True
            break

    states = Trajectory(grid, ys)
    controls = ControlGrid(grid, u)
    return SolveResult(
        states=states,
        adjoints=AdjointTrajectory(grid, lam),
        controls=controls,
        cost_value=cost(states, controls, weights, kind),
        iterations=iterations,
        converged=converged,
    )
