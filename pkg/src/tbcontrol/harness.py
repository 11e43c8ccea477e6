"""Scenario catalog, configuration files and batch output writing.

A scenario bundles everything one solver run needs: parameters, cost
weights and kind, control-enable flags, the time grid and the sweep
settings. The built-in catalog covers the standard experiment set for
this model (baseline with and without controls, transmission and
population sweeps, weight and efficacy sweeps, high-transmission cases
and the two cost variants); each entry is a plain ScenarioSpec that can
also be written to and read from a config file.

Outputs per scenario: a trajectory CSV in absolute persons, a companion
CSV with compartment fractions of N, and a summary JSON. All output is
deterministic, so identical specs produce bit-identical files.
"""

from __future__ import annotations

import configparser
import json
import re
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DivergenceError, InvalidInputError, NumericalError
from .model import PARAMETER_FIELDS, Parameters, default_parameters, initial_state
from .optimizer import (
    CostKind,
    CostWeights,
    SolveResult,
    SweepConfig,
    fbs_solve,
)
from .integrator import TimeGrid
from .reproduction import R0Report, r0_report

__all__ = [
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
]

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

TRAJECTORY_HEADER = "t,S,L1,I,L2,R,u1,u2,lambda1,lambda2,lambda3,lambda4,lambda5"
FRACTIONS_HEADER = "t,S,L1,I,L2,R"


@dataclass(frozen=True)
class ScenarioSpec:
    """A fully specified solver run.

    The initial state is always the standard compartment split of
    n_total, so changing the population size only requires changing
    params. Disabling a control pins it at its initial guess value for
    the whole horizon (with the default guess 0 this removes it).
    """

    name: str
    params: Parameters
    weights: CostWeights
    cost_kind: CostKind = CostKind.I_PLUS_L2
    u1_enabled: bool = True
    u2_enabled: bool = True
    t_end: float = 5.0
    n_steps: int = 5000
    theta: float = 0.5
    tolerance: float = 1e-4
    max_iterations: int = 500
    initial_u1: float = 0.0
    initial_u2: float = 0.0

    def __post_init__(self):
        if not isinstance(self.name, str) or not _NAME_RE.match(self.name):
            raise InvalidInputError(
                f"scenario name must be a filesystem-safe identifier, got {self.name!r}"
            )
        if not isinstance(self.params, Parameters):
            raise InvalidInputError("params must be a Parameters instance")
        if not isinstance(self.weights, CostWeights):
            raise InvalidInputError("weights must be a CostWeights instance")
        object.__setattr__(self, "cost_kind", CostKind(self.cost_kind))
        for flag in ("u1_enabled", "u2_enabled"):
            if not isinstance(getattr(self, flag), bool):
                raise InvalidInputError(f"{flag} must be a bool")
        # Builds the grid and sweep config once, purely for validation.
        self.to_sweep_config()

    def grid(self) -> TimeGrid:
        return TimeGrid(0.0, self.t_end, self.n_steps)

    def to_sweep_config(self) -> SweepConfig:
        return SweepConfig(
            theta=self.theta,
            tolerance=self.tolerance,
            max_iterations=self.max_iterations,
            grid=self.grid(),
            initial_u1=self.initial_u1,
            initial_u2=self.initial_u2,
            u1_enabled=self.u1_enabled,
            u2_enabled=self.u2_enabled,
        )

    def replace(self, **changes) -> "ScenarioSpec":
        return dc_replace(self, **changes)


@dataclass(frozen=True)
class ScenarioOutcome:
    """What one scenario run produced.

    r0_uncontrolled is the basic reproduction number at u = (0, 0) and
    r0_controlled at u = (1, 1), both from the closed form. result is
    None only when error is set (a solver failure captured by a sweep).
    files lists the paths written, empty when no output directory was
    given.
    """

    spec: ScenarioSpec
    r0_uncontrolled: R0Report
    r0_controlled: R0Report
    result: SolveResult | None
    files: tuple = ()
    error: str | None = None

    def summary(self) -> dict:
        """JSON-ready summary; deterministic for identical runs."""
        out = {
            "scenario": self.spec.name,
            "cost_kind": self.spec.cost_kind.value,
            "weights": {"w1": self.spec.weights.w1, "w2": self.spec.weights.w2},
            "controls_enabled": {"u1": self.spec.u1_enabled, "u2": self.spec.u2_enabled},
            "r0_uncontrolled": self.r0_uncontrolled.value,
            "r0_controlled": self.r0_controlled.value,
        }
        if self.result is not None:
            terminal = self.result.states.terminal
            out.update(
                {
                    "converged": self.result.converged,
                    "iterations": self.result.iterations,
                    "cost": self.result.cost_value,
                    "terminal": {
                        "S": float(terminal[0]),
                        "L1": float(terminal[1]),
                        "I": float(terminal[2]),
                        "L2": float(terminal[3]),
                        "R": float(terminal[4]),
                        "I_plus_L2": self.result.terminal_infected,
                    },
                    "upper_bound_durations": {
                        "u1": self.result.u1_upper_duration,
                        "u2": self.result.u2_upper_duration,
                    },
                }
            )
        if self.error is not None:
            out["error"] = self.error
        return out


def default_spec(name: str = "custom") -> ScenarioSpec:
    """Baseline scenario: beta=100, N=30000, W1=500, W2=50, both controls."""
    return ScenarioSpec(name=name, params=default_parameters(), weights=CostWeights(500.0, 50.0))


def _catalog() -> dict:
    base = default_parameters()
    specs = []

    def add(name, beta=100.0, n=30000.0, eps=0.5, w1=500.0, w2=50.0,
            kind=CostKind.I_PLUS_L2, u1=True, u2=True):
        params = base.replace(beta=beta, n_total=n, eps1=eps, eps2=eps)
        specs.append(
            ScenarioSpec(
                name=name,
                params=params,
                weights=CostWeights(w1, w2),
                cost_kind=kind,
                u1_enabled=u1,
                u2_enabled=u2,
            )
        )

    add("fig1-baseline")
    add("fig2-nocontrol", u1=False, u2=False)
    # Same solve as the baseline; kept as its own entry because the
    # compartment-level plots are usually read from a separate file.
    add("fig3-compartments")
    for b in (75.0, 100.0, 150.0, 175.0):
        add(f"fig4-beta-{b:g}", beta=b)
    for n in (30000.0, 40000.0, 60000.0):
        add(f"fig5-n-{n:g}", n=n)
    for w2 in (50.0, 150.0, 250.0):
        add(f"fig6-w2-{w2:g}", w2=w2)
    for w1 in (500.0, 250.0, 150.0):
        add(f"fig7-w1-{w1:g}", w1=w1)
    for w in (50.0, 150.0, 250.0):
        add(f"fig8-weq-{w:g}", w1=w, w2=w)
    for e in (0.25, 0.5, 0.75):
        add(f"fig9-eps-{e:g}", eps=e)
    add("fig9-nocontrol-b200", beta=200.0, u1=False, u2=False)
    add("fig10-b200", beta=200.0, w1=500.0, w2=500.0)
    add("fig11-b250", beta=250.0, w1=500.0, w2=500.0)
    add("fig11-nocontrol-b250", beta=250.0, u1=False, u2=False)
    add("fig12-cost-j-b100", w1=500.0, w2=500.0, kind=CostKind.I_PLUS_L2)
    add("fig13-cost-c-b100", w1=500.0, w2=500.0, kind=CostKind.I_ONLY)
    add("fig14-cost-j-b175", beta=175.0, w1=500.0, w2=500.0, kind=CostKind.I_PLUS_L2)
    add("fig15-cost-c-b175", beta=175.0, w1=500.0, w2=500.0, kind=CostKind.I_ONLY)
    add("fig16-u1only", u2=False)
    return {spec.name: spec for spec in specs}


_BUILTIN = _catalog()


def builtin_scenarios() -> dict:
    """Name-to-spec mapping of the built-in catalog, in catalog order."""
    return dict(_BUILTIN)


def builtin_names() -> list:
    return list(_BUILTIN)


def get_scenario(name: str) -> ScenarioSpec:
    try:
        return _BUILTIN[name]
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; available: {', '.join(_BUILTIN)}"
        ) from None


def run_scenario(spec: ScenarioSpec, out_dir=None) -> ScenarioOutcome:
    """Solve one scenario and optionally write its output files.

    Solver failures are re-raised with the scenario name attached.
    Non-convergence is not a failure; it shows up in the result flags.
    """
    r0_off = r0_report(spec.params, 0.0, 0.0)
    r0_on = r0_report(spec.params, 1.0, 1.0)
    try:
        result = fbs_solve(
            spec.params,
            initial_state(spec.params),
            spec.weights,
            spec.cost_kind,
            spec.to_sweep_config(),
        )
    except DivergenceError as exc:
        raise DivergenceError(f"scenario {spec.name!r}: {exc}", step=exc.step) from exc
    except NumericalError as exc:
        raise NumericalError(f"scenario {spec.name!r}: {exc}") from exc
    outcome = ScenarioOutcome(
        spec=spec, r0_uncontrolled=r0_off, r0_controlled=r0_on, result=result
    )
    if out_dir is not None:
        outcome = dc_replace(outcome, files=tuple(str(p) for p in write_csv(outcome, out_dir)))
    return outcome


_SWEEPABLE = set(PARAMETER_FIELDS) | {"w1", "w2", "eps"}


def _derived_spec(base: ScenarioSpec, parameter: str, value: float) -> ScenarioSpec:
    if parameter not in _SWEEPABLE:
        raise ConfigError(
            f"cannot sweep {parameter!r}; expected one of {', '.join(sorted(_SWEEPABLE))}"
        )
    # "%g" may print exponents like 1e+07; "+" is not filename-safe here.
    name = f"{base.name}-{parameter}-{value:g}".replace("+", "")
    if parameter == "w1":
        return base.replace(name=name, weights=CostWeights(value, base.weights.w2))
    if parameter == "w2":
        return base.replace(name=name, weights=CostWeights(base.weights.w1, value))
    if parameter == "eps":
        # Shorthand for moving both efficacies together, the usual
        # experiment when comparing intervention quality.
        return base.replace(name=name, params=base.params.replace(eps1=value, eps2=value))
    return base.replace(name=name, params=base.params.replace(**{parameter: value}))


def run_sweep(base: ScenarioSpec, parameter: str, values, out_dir=None) -> list:
    """Run one scenario per value, independently and in the given order.

    A solver failure in one scenario is captured in that outcome's error
    field and the sweep continues; every outcome is returned either way.
    """
    values = list(values)
    if not values:
        raise InvalidInputError("sweep needs at least one value")
    outcomes = []
    for value in values:
        spec = _derived_spec(base, parameter, value)
        try:
            outcomes.append(run_scenario(spec, out_dir))
        except (DivergenceError, NumericalError) as exc:
            outcome = ScenarioOutcome(
                spec=spec,
                r0_uncontrolled=r0_report(spec.params, 0.0, 0.0),
                r0_controlled=r0_report(spec.params, 1.0, 1.0),
                result=None,
                error=str(exc),
            )
            if out_dir is not None:
                outcome = dc_replace(
                    outcome, files=tuple(str(p) for p in write_csv(outcome, out_dir))
                )
            outcomes.append(outcome)
    return outcomes


def run_catalog(out_dir=None, names=None) -> list:
    """Run built-in scenarios (all by default) in catalog order."""
    selected = builtin_names() if names is None else list(names)
    return [run_scenario(get_scenario(name), out_dir) for name in selected]


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(outcome: ScenarioOutcome, out_dir) -> list:
    """Write the outcome's files into out_dir and return their paths.

    Produces <name>.csv (absolute persons plus controls and costates),
    <name>_fractions.csv (compartments divided by N) and
    <name>_summary.json. A failed outcome gets only the summary file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = outcome.spec.name
    paths = []

    if outcome.result is not None:
        result = outcome.result
        grid = result.states.grid
        t = grid.times()
        ys = result.states.values
        u = result.controls.values
        lam = result.adjoints.values
        rows = np.hstack([t[:, None], ys, u, lam])

        traj_path = out / f"{name}.csv"
        with open(traj_path, "w", newline="\n") as fh:
            fh.write(TRAJECTORY_HEADER + "\n")
            for row in rows:
                fh.write(",".join(_fmt(x) for x in row) + "\n")
        paths.append(traj_path)

        frac_path = out / f"{name}_fractions.csv"
        n_total = outcome.spec.params.n_total
        with open(frac_path, "w", newline="\n") as fh:
            fh.write(FRACTIONS_HEADER + "\n")
            for j in range(ys.shape[0]):
                cells = [_fmt(t[j])] + [_fmt(ys[j, k] / n_total) for k in range(5)]
                fh.write(",".join(cells) + "\n")
        paths.append(frac_path)

    summary_path = out / f"{name}_summary.json"
    with open(summary_path, "w", newline="\n") as fh:
        fh.write(json.dumps(outcome.summary(), indent=2, sort_keys=True) + "\n")
    paths.append(summary_path)
    return paths


# Config file layout: every key lives in exactly one section, and every
# key name is unique across sections so --set overrides can stay flat.
_CONFIG_SCHEMA = {
    "scenario": ("name", "cost_kind", "u1_enabled", "u2_enabled"),
    "parameters": PARAMETER_FIELDS,
    "weights": ("w1", "w2"),
    "grid": ("t_end", "n_steps"),
    "sweep": ("theta", "tolerance", "max_iterations", "initial_u1", "initial_u2"),
}

_BOOL_VALUES = {
    "true": True, "yes": True, "on": True, "1": True,
    "false": False, "no": False, "off": False, "0": False,
}


def _parse_bool(key: str, raw: str) -> bool:
    try:
        return _BOOL_VALUES[raw.strip().lower()]
    except KeyError:
        raise ConfigError(f"key {key!r} expects a boolean, got {raw!r}") from None


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} expects a number, got {raw!r}") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} expects an integer, got {raw!r}") from None


def _apply_key(spec: ScenarioSpec, key: str, raw: str) -> ScenarioSpec:
    """Set one flat config key on a spec, parsing raw text to its type."""
    if key == "name":
        return spec.replace(name=raw.strip())
    if key == "cost_kind":
        try:
            kind = CostKind(raw.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in CostKind)
            raise ConfigError(f"key 'cost_kind' expects one of {choices}, got {raw!r}") from None
        return spec.replace(cost_kind=kind)
    if key in ("u1_enabled", "u2_enabled"):
        return spec.replace(**{key: _parse_bool(key, raw)})
    if key in PARAMETER_FIELDS:
        return spec.replace(params=spec.params.replace(**{key: _parse_float(key, raw)}))
    if key in ("w1", "w2"):
        values = {"w1": spec.weights.w1, "w2": spec.weights.w2}
        values[key] = _parse_float(key, raw)
        return spec.replace(weights=CostWeights(**values))
    if key in ("n_steps", "max_iterations"):
        return spec.replace(**{key: _parse_int(key, raw)})
    if key in ("t_end", "theta", "tolerance", "initial_u1", "initial_u2"):
        return spec.replace(**{key: _parse_float(key, raw)})
    raise ConfigError(f"unknown key {key!r}")


def load_config(path) -> ScenarioSpec:
    """Read a scenario config file; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    spec = default_spec()
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ConfigError(
                f"unknown section {section!r} in {path}; expected one of "
                + ", ".join(_CONFIG_SCHEMA)
            )
        allowed = _CONFIG_SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section {section!r} of {path}")
            try:
                spec = _apply_key(spec, key, raw)
            except InvalidInputError as exc:
                raise ConfigError(f"invalid value for {key!r} in {path}: {exc}") from exc
    return spec


def save_config(spec: ScenarioSpec, path) -> None:
    """Write a spec as a config file that load_config reads back equal."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["scenario"] = {
        "name": spec.name,
        "cost_kind": spec.cost_kind.value,
        "u1_enabled": str(spec.u1_enabled).lower(),
        "u2_enabled": str(spec.u2_enabled).lower(),
    }
    parser["parameters"] = {k: _fmt(getattr(spec.params, k)) for k in PARAMETER_FIELDS}
    parser["weights"] = {"w1": _fmt(spec.weights.w1), "w2": _fmt(spec.weights.w2)}
    parser["grid"] = {"t_end": _fmt(spec.t_end), "n_steps": str(spec.n_steps)}
    parser["sweep"] = {
        "theta": _fmt(spec.theta),
        "tolerance": _fmt(spec.tolerance),
        "max_iterations": str(spec.max_iterations),
        "initial_u1": _fmt(spec.initial_u1),
        "initial_u2": _fmt(spec.initial_u2),
    }
    with open(path, "w", newline="\n") as fh:
        parser.write(fh)


def apply_overrides(spec: ScenarioSpec, assignments) -> ScenarioSpec:
    """Apply key=value override strings (the CLI --set payload)."""
    for item in assignments:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            spec = _apply_key(spec, key, raw)
        except InvalidInputError as exc:
            raise ConfigError(f"invalid value for {key!r}: {exc}") from exc
    return spec
