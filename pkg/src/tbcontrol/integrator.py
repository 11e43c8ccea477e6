"""Classic fixed-step RK4 over a uniform grid, forward and backward.

The forward direction integrates a state system whose right-hand side may
depend on gridded control inputs; the backward direction integrates a
costate system from a terminal condition, reading gridded state and
control inputs. Both directions evaluate gridded inputs at half steps as
the average of the two adjacent node values, which is second-order
consistent and keeps every produced value attached to a grid node.

The derivative callables use these signatures:

    forward:  f(t, y, u) -> dy/dt      y is (k,), u is (2,)
    backward: g(t, lam, x, u) -> dlam/dt

where x and u are the gridded inputs sampled at time t. Any non-finite
value appearing during integration raises DivergenceError with the step
index at which it was produced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .model import State

__all__ = [
    "TimeGrid",
    "Trajectory",
    "AdjointTrajectory",
    "ControlGrid",
    "rk4_forward",
    "rk4_backward",
]


@dataclass(frozen=True)
class TimeGrid:
    """A uniform grid on [t_start, t_end] with n_steps intervals."""

    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not np.isfinite(self.t_start) or not np.isfinite(self.t_end):
            raise InvalidInputError("grid endpoints must be finite")
        if self.t_end <= self.t_start:
            raise InvalidInputError("t_end must exceed t_start")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidInputError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def h(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_nodes)


def _as_node_values(grid: TimeGrid, values, width: int, what: str) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    if a.shape != (grid.n_nodes, width):
        raise InvalidInputError(
            f"{what} must have shape ({grid.n_nodes}, {width}), got {a.shape}"
        )
    return a


@dataclass(frozen=True)
class Trajectory:
    """State values at every grid node, row j at time t_start + j*h."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=float)
        if a.ndim != 2 or a.shape[0] != self.grid.n_nodes:
            raise InvalidInputError(
                f"trajectory needs {self.grid.n_nodes} rows, got shape {a.shape}"
            )
        object.__setattr__(self, "values", a)

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]


@dataclass(frozen=True)
class AdjointTrajectory:
    """Costate values at every grid node, row j at time t_start + j*h."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=float)
        if a.ndim != 2 or a.shape[0] != self.grid.n_nodes:
            raise InvalidInputError(
                f"adjoint needs {self.grid.n_nodes} rows, got shape {a.shape}"
            )
        object.__setattr__(self, "values", a)

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]


@dataclass(frozen=True)
class ControlGrid:
    """Control pairs at every grid node, each component in [0, 1]."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        a = _as_node_values(self.grid, self.values, 2, "controls")
        if not np.isfinite(a).all() or a.min() < 0.0 or a.max() > 1.0:
            raise InvalidInputError("control values must lie in [0, 1]")
        object.__setattr__(self, "values", a)

    @classmethod
    def constant(cls, grid: TimeGrid, u1: float = 0.0, u2: float = 0.0) -> "ControlGrid":
        values = np.tile(np.array([u1, u2], dtype=float), (grid.n_nodes, 1))
        return cls(grid, values)


def _control_array(grid: TimeGrid, controls) -> np.ndarray:
    if controls is None:
        return np.zeros((grid.n_nodes, 2))
    if isinstance(controls, ControlGrid):
        if controls.grid != grid:
            raise InvalidInputError("controls are defined on a different grid")
        return controls.values
    return _as_node_values(grid, controls, 2, "controls")


def rk4_forward(derivative, initial, grid: TimeGrid, controls=None) -> Trajectory:
    """Integrate y' = f(t, y, u) forward across the grid.

    ``initial`` may be a State or any array-like. ``controls`` may be a
    ControlGrid, a raw (n_nodes, 2) array, or None for zero controls.
    """
    y = initial.to_array() if isinstance(initial, State) else np.asarray(initial, dtype=float)
    y = np.atleast_1d(y.astype(float))
    u = _control_array(grid, controls)
    h = grid.h
    t0 = grid.t_start
    out = np.empty((grid.n_nodes, y.size))
    out[0] = y
    for j in range(grid.n_steps):
        t = t0 + j * h
        ua, ub = u[j], u[j + 1]
        um = 0.5 * (ua + ub)
        k1 = derivative(t, y, ua)
        k2 = derivative(t + 0.5 * h, y + 0.5 * h * k1, um)
        k3 = derivative(t + 0.5 * h, y + 0.5 * h * k2, um)
        k4 = derivative(t + h, y + h * k3, ub)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y).all():
            raise DivergenceError(f"forward integration produced a non-finite value at step {j + 1}", step=j + 1)
        out[j + 1] = y
    return Trajectory(grid, out)


def rk4_backward(derivative, terminal, grid: TimeGrid, states: Trajectory, controls=None) -> AdjointTrajectory:
    """Integrate lam' = g(t, lam, x, u) backward from t_end to t_start.

    ``terminal`` sets the last grid node. ``states`` supplies the gridded
    x input and must live on the same grid.
    """
    if states.grid != grid:
        raise InvalidInputError("states are defined on a different grid")
    xs = states.values
    u = _control_array(grid, controls)
    lam = np.atleast_1d(np.asarray(terminal, dtype=float).copy())
    h = grid.h
    t0 = grid.t_start
    out = np.empty((grid.n_nodes, lam.size))
    out[-1] = lam
    for j in range(grid.n_steps, 0, -1):
        t = t0 + j * h
        xa, xb = xs[j], xs[j - 1]
        ua, ub = u[j], u[j - 1]
        xm = 0.5 * (xa + xb)
        um = 0.5 * (ua + ub)
        k1 = derivative(t, lam, xa, ua)
        k2 = derivative(t - 0.5 * h, lam - 0.5 * h * k1, xm, um)
        k3 = derivative(t - 0.5 * h, lam - 0.5 * h * k2, xm, um)
        k4 = derivative(t - h, lam - h * k3, xb, ub)
        lam = lam - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(lam).all():
            raise DivergenceError(f"backward integration produced a non-finite value at step {j - 1}", step=j - 1)
        out[j - 1] = lam
    return AdjointTrajectory(grid, out)
