"""Basic reproduction number and its sensitivity to parameters.

R0 is available through two independent routes. ``r0_closed_form``
evaluates an explicit rational expression in the model rates and the
(constant) control levels. ``r0_ngm`` builds the new-infection and
transition Jacobians at the disease-free equilibrium, inverts the
transition part numerically and returns the spectral radius of their
product. The two routes agree to high accuracy and serve as mutual
checks; neither is derived from the other in code.

Sensitivity of R0 to a parameter p is reported as the normalized forward
index (dR0/dp) * p / |R0|, the elasticity of R0. Closed forms exist for
beta (exactly 1, since R0 is proportional to beta) and for u1; any other
parameter can be probed with central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError
from .model import ControlValue, Parameters, State, dfe

__all__ = [
    "R0Report",
    "SensitivityIndex",
    "r0_closed_form",
    "r0_ngm",
    "r0_report",
    "sensitivity_beta",
    "sensitivity_u1",
    "sensitivity_numeric",
]

_SENSITIVITY_NAMES = (
    "beta",
    "mu",
    "delta",
    "phi",
    "omega",
    "omega_r",
    "sigma",
    "sigma_r",
    "tau0",
    "tau1",
    "tau2",
    "eps1",
    "eps2",
    "n_total",
    "u1",
    "u2",
)


@dataclass(frozen=True)
class R0Report:
    """R0 evaluated at fixed control levels, with the method used."""

    value: float
    u1: float
    u2: float
    method: str  # "closed_form" or "ngm"

    @property
    def classification(self) -> str:
        """Threshold reading: below one the disease dies out."""
        if self.value < 1.0:
            return "dies out"
        if self.value > 1.0:
            return "may become endemic"
        return "threshold"


@dataclass(frozen=True)
class SensitivityIndex:
    """Normalized forward sensitivity index of R0 for one parameter."""

    parameter: str
    value: float


def r0_closed_form(params: Parameters, u1: float = 0.0, u2: float = 0.0) -> float:
    """R0 at constant control levels, from the explicit rational formula.

    The meaningful domain for u1 and u2 is [0, 1]; values slightly outside
    are accepted so the expression can be probed by finite differences.
    Every denominator factor is strictly positive for valid parameters, so
    the expression never divides by zero there.
    """
    p = params
    e2u2 = p.eps2 * u2
    num = p.omega_r * (p.omega + p.tau2 + p.mu + e2u2) * p.tau1 + p.delta * (
        (p.omega + p.phi * p.mu) * (p.omega_r + p.mu)
        + (p.omega_r + p.phi * p.mu) * (p.tau2 + e2u2)
    )
    den = (
        (p.omega_r + p.tau0 + p.mu + p.eps1 * u1)
        * (p.delta + p.tau1 + p.mu)
        * (p.omega + p.tau2 + p.mu + e2u2)
    )
    return num / den * p.beta / p.mu


def _new_infection_jacobian(state: State, control: ControlValue, params: Parameters) -> np.ndarray:
    """Jacobian of the new-infection inflow vector at an arbitrary state."""
    p = params
    j = np.zeros((5, 5))
    # New infections enter L1 only; the row differentiates
    # beta*I*(S + sigma*L2 + sigma_r*R)/N in (S, L1, I, L2, R).
    j[1, 0] = p.beta * state.i / p.n_total
    j[1, 2] = p.beta * (state.s + p.sigma * state.l2 + p.sigma_r * state.r) / p.n_total
    j[1, 3] = p.beta * state.i * p.sigma / p.n_total
    j[1, 4] = p.beta * state.i * p.sigma_r / p.n_total
    return j


def _transition_jacobian(state: State, control: ControlValue, params: Parameters) -> np.ndarray:
    """Jacobian of the remaining (non-infection) net outflow terms."""
    p = params
    foi = p.beta * state.i / p.n_total
    t1 = p.tau0 + p.eps1 * control.u1
    t2 = p.tau2 + p.eps2 * control.u2
    return np.array(
        [
            [foi + p.mu, 0.0, p.beta * state.s / p.n_total, 0.0, 0.0],
            [0.0, p.delta + p.tau1 + p.mu, 0.0, 0.0, 0.0],
            [0.0, -p.phi * p.delta, t1 + p.mu, -p.omega, -p.omega_r],
            [
                0.0,
                -(1 - p.phi) * p.delta,
                p.sigma * p.beta * state.l2 / p.n_total,
                p.sigma * foi + p.omega + p.eps2 * control.u2 + p.tau2 + p.mu,
                0.0,
            ],
            [
                0.0,
                -p.tau1,
                -t1 + p.sigma_r * p.beta * state.r / p.n_total,
                -t2,
                p.sigma_r * foi + p.omega_r + p.mu,
            ],
        ]
    )


def _spectral_radius(matrix: np.ndarray, tol: float = 1e-12, max_iterations: int = 10000) -> float:
    """Dominant eigenvalue magnitude by power iteration."""
    v = np.full(matrix.shape[0], 1.0 / math.sqrt(matrix.shape[0]))
    estimate = 0.0
    for _ in range(max_iterations):
        w = matrix @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        new_estimate = norm / float(np.linalg.norm(v))
        v = w / norm
        if abs(new_estimate - estimate) <= tol * max(1.0, new_estimate):
            return new_estimate
        estimate = new_estimate
    raise NumericalError("power iteration did not converge")


def r0_ngm(params: Parameters, u1: float = 0.0, u2: float = 0.0) -> float:
    """R0 as the spectral radius of the next-generation matrix.

    The new-infection and transition Jacobians are formed at the
    disease-free equilibrium with the given control levels held constant,
    the transition Jacobian is inverted numerically, and the dominant
    eigenvalue of the product is found by power iteration.
    """
    u = ControlValue(min(max(u1, 0.0), 1.0), min(max(u2, 0.0), 1.0))
    equilibrium = dfe(params)
    f = _new_infection_jacobian(equilibrium, u, params)
    v = _transition_jacobian(equilibrium, u, params)
    try:
        v_inv = np.linalg.inv(v)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"transition Jacobian is singular: {exc}") from exc
    return _spectral_radius(f @ v_inv)


def r0_report(params: Parameters, u1: float = 0.0, u2: float = 0.0, method: str = "closed_form") -> R0Report:
    """Evaluate R0 by the requested method and wrap it with context."""
    if method == "closed_form":
        value = r0_closed_form(params, u1, u2)
    elif method == "ngm":
        value = r0_ngm(params, u1, u2)
    else:
        raise InvalidInputError(f"unknown method {method!r}, expected closed_form or ngm")
    return R0Report(value=value, u1=u1, u2=u2, method=method)


def sensitivity_beta(params: Parameters, u1: float = 0.0, u2: float = 0.0) -> SensitivityIndex:
    """Elasticity of R0 in beta. R0 is proportional to beta, so it is 1."""
    return SensitivityIndex("beta", 1.0)


def sensitivity_u1(params: Parameters, u1: float, u2: float = 0.0) -> SensitivityIndex:
    """Elasticity of R0 in u1: -eps1*u1 / (omega_r + tau0 + mu + eps1*u1).

    Zero at u1 = 0 and strictly negative otherwise, approaching its
    largest magnitude at u1 = 1. Independent of u2.
    """
    p = params
    value = -p.eps1 * u1 / (p.omega_r + p.tau0 + p.mu + p.eps1 * u1)
    return SensitivityIndex("u1", value)


def sensitivity_numeric(
    params: Parameters,
    parameter: str,
    u1: float = 0.0,
    u2: float = 0.0,
    step: float = 1e-5,
) -> SensitivityIndex:
    """Elasticity of R0 in any parameter, by central finite differences.

    ``step`` is relative to the parameter value, which must be nonzero so
    a relative step exists. The closed-form R0 is the function being
    differenced.
    """
    if parameter not in _SENSITIVITY_NAMES:
        raise InvalidInputError(f"unknown parameter {parameter!r}")
    if not (isinstance(step, (int, float)) and math.isfinite(step)) or step <= 0:
        raise InvalidInputError(f"step must be positive and finite, got {step!r}")

    if parameter == "u1":
        center = u1
    elif parameter == "u2":
        center = u2
    else:
        center = getattr(params, parameter)
    if center == 0:
        raise InvalidInputError(f"cannot take a relative step at {parameter} = 0")
    h = step * abs(center)
    if center + h == center or center - h == center:
        raise InvalidInputError(f"step {step} underflows at {parameter} = {center}")

    def evaluate(x: float) -> float:
        if parameter == "u1":
            return r0_closed_form(params, x, u2)
        if parameter == "u2":
            return r0_closed_form(params, u1, x)
        return r0_closed_form(params.replace(**{parameter: x}), u1, u2)

    base = r0_closed_form(params, u1, u2)
    derivative = (evaluate(center + h) - evaluate(center - h)) / (2 * h)
    return SensitivityIndex(parameter, derivative * center / abs(base))
