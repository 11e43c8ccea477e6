"""Compartmental tuberculosis dynamics with two treatment controls.

The population is split into five compartments: susceptible (S), early
latent (L1, infected less than about two years, not infectious), active
infectious (I), persistent latent (L2) and recovered (R). Transmission is
frequency dependent with coefficient beta, births balance deaths at rate mu
and there are no disease-related deaths, so the total population N stays
constant along exact solutions.

Two time-dependent controls act on the flows out of I and L2. Control u1
supports active cases through treatment completion and moves I to R at the
extra rate eps1*u1. Control u2 puts persistent latents under therapy and
moves L2 to R at the extra rate eps2*u2. Both controls take values in
[0, 1]; the efficacy factors eps1 and eps2 scale their effect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "Parameters",
    "State",
    "ControlValue",
    "PARAMETER_FIELDS",
    "INITIAL_SHARES",
    "rhs",
    "dfe",
    "default_parameters",
    "initial_state",
]

# Field order is also the layout of Parameters.to_array().
PARAMETER_FIELDS = (
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
)

# Compartment shares of the total population at t = 0, in state order
# (S, L1, I, L2, R). The shares sum to one exactly.
INITIAL_SHARES = (76 / 120, 37 / 120, 4 / 120, 2 / 120, 1 / 120)


@dataclass(frozen=True)
class Parameters:
    """Epidemiological rates, control efficacies and the population size.

    Attributes:
        beta: transmission coefficient, per year.
        mu: birth and death rate, per year.
        delta: rate at which individuals leave L1, per year.
        phi: proportion of those leaving L1 that develop active disease.
        omega: endogenous reactivation rate of persistent latents, per year.
        omega_r: endogenous reactivation rate of treated individuals, per year.
        sigma: factor reducing the reinfection risk of L2 individuals.
        sigma_r: factor reducing the reinfection risk of R individuals.
        tau0: recovery rate of active cases under treatment, per year.
        tau1: recovery rate of L1 under post-exposure intervention, per year.
        tau2: recovery rate of L2 under post-exposure intervention, per year.
        eps1: efficacy of control u1, in (0, 1).
        eps2: efficacy of control u2, in (0, 1).
        n_total: total population size N, persons.
    """

    beta: float
    mu: float
    delta: float
    phi: float
    omega: float
    omega_r: float
    sigma: float
    sigma_r: float
    tau0: float
    tau1: float
    tau2: float
    eps1: float
    eps2: float
    n_total: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidInputError(f"parameter {f.name} must be a finite number, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        for name in ("beta", "mu", "delta", "omega", "omega_r", "tau0", "tau1", "tau2"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"rate {name} must be non-negative")
        for name in ("phi", "sigma", "sigma_r"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise InvalidInputError(f"{name} must lie in [0, 1], got {v}")
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InvalidInputError(f"{name} must lie strictly inside (0, 1), got {v}")
        if self.mu <= 0:
            raise InvalidInputError("mu must be positive")
        if self.n_total <= 0:
            raise InvalidInputError("n_total must be positive")

    def to_array(self) -> np.ndarray:
        """Return the parameter values as float64 in PARAMETER_FIELDS order."""
        return np.array([getattr(self, name) for name in PARAMETER_FIELDS], dtype=float)

    def replace(self, **changes) -> "Parameters":
        """Return a copy with the given fields replaced (revalidated)."""
        values = {name: getattr(self, name) for name in PARAMETER_FIELDS}
        for key in changes:
            if key not in values:
                raise InvalidInputError(f"unknown parameter {key!r}")
        values.update(changes)
        return Parameters(**values)


@dataclass(frozen=True)
class State:
    """Compartment populations (persons) in the order S, L1, I, L2, R."""

    s: float
    l1: float
    i: float
    l2: float
    r: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidInputError(f"state component {f.name} must be finite, got {v!r}")
            if v < 0:
                raise InvalidInputError(f"state component {f.name} must be non-negative, got {v}")
            object.__setattr__(self, f.name, float(v))

    def to_array(self) -> np.ndarray:
        return np.array([self.s, self.l1, self.i, self.l2, self.r], dtype=float)

    @classmethod
    def from_array(cls, values) -> "State":
        a = np.asarray(values, dtype=float)
        if a.shape != (5,):
            raise InvalidInputError(f"state array must have shape (5,), got {a.shape}")
        return cls(*a.tolist())

    @property
    def total(self) -> float:
        return self.s + self.l1 + self.i + self.l2 + self.r


@dataclass(frozen=True)
class ControlValue:
    """A pointwise pair of control levels, each in [0, 1]."""

    u1: float
    u2: float

    def __post_init__(self):
        for name in ("u1", "u2"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidInputError(f"control {name} must be finite, got {v!r}")
            if not 0 <= v <= 1:
                raise InvalidInputError(f"control {name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, float(v))


def rhs(state: State, control: ControlValue, params: Parameters) -> np.ndarray:
    """Time derivative of the five compartments, persons per year.

    Returns an array (dS, dL1, dI, dL2, dR). On the invariant manifold
    where the compartments sum to n_total the components sum to zero
    exactly, because births balance deaths; off the manifold the sum is
    mu * (n_total - total), which drives the total back toward N.
    """
    p = params
    s, l1, i, l2, r = state.s, state.l1, state.i, state.l2, state.r
    foi = p.beta * i / p.n_total
    ds = p.mu * p.n_total - foi * s - p.mu * s
    dl1 = foi * (s + p.sigma * l2 + p.sigma_r * r) - (p.delta + p.tau1 + p.mu) * l1
    di = (
        p.phi * p.delta * l1
        + p.omega * l2
        + p.omega_r * r
        - (p.tau0 + p.eps1 * control.u1 + p.mu) * i
    )
    dl2 = (
        (1 - p.phi) * p.delta * l1
        - p.sigma * foi * l2
        - (p.omega + p.eps2 * control.u2 + p.tau2 + p.mu) * l2
    )
    dr = (
        (p.tau0 + p.eps1 * control.u1) * i
        + p.tau1 * l1
        + (p.tau2 + p.eps2 * control.u2) * l2
        - p.sigma_r * foi * r
        - (p.omega_r + p.mu) * r
    )
    return np.array([ds, dl1, di, dl2, dr])


def dfe(params: Parameters) -> State:
    """The disease-free equilibrium (N, 0, 0, 0, 0)."""
    return State(params.n_total, 0.0, 0.0, 0.0, 0.0)


def default_parameters() -> Parameters:
    """Baseline parameter set used by the built-in scenarios.

    beta = 100 and n_total = 30000 are the baseline choices; the remaining
    rates are the standard values for this model: mean lifetime of 70
    years, progression out of L1 within roughly a month, slow endogenous
    reactivation, reinfection risk cut to a quarter after a first
    infection, and six-month treatment of active disease.
    """
    return Parameters(
        beta=100.0,
        mu=1.0 / 70.0,
        delta=12.0,
        phi=0.05,
        omega=0.0002,
        omega_r=0.00002,
        sigma=0.25,
        sigma_r=0.25,
        tau0=2.0,
        tau1=2.0,
        tau2=1.0,
        eps1=0.5,
        eps2=0.5,
        n_total=30000.0,
    )


def initial_state(params: Parameters) -> State:
    """Initial compartment populations: INITIAL_SHARES times n_total."""
    n = params.n_total
    return State(*(share * n for share in INITIAL_SHARES))
