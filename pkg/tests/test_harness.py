"""Scenario catalog, batch runs, file outputs and config handling."""

import json

import numpy as np
import pytest

from tbcontrol import (
    ConfigError,
    CostKind,
    CostWeights,
    InvalidInputError,
    ScenarioSpec,
    apply_overrides,
    builtin_names,
    builtin_scenarios,
    default_parameters,
    default_spec,
    get_scenario,
    load_config,
    run_catalog,
    run_scenario,
    run_sweep,
    save_config,
)
from tbcontrol.harness import FRACTIONS_HEADER, TRAJECTORY_HEADER


@pytest.fixture(scope="module")
def catalog():
    outcomes = run_catalog()
    return {o.spec.name: o for o in outcomes}


def test_catalog_composition():
    names = builtin_names()
    assert len(names) == 31
    assert names[0] == "fig1-baseline"
    assert "fig2-nocontrol" in names
    assert "fig16-u1only" in names
    # The mapping is a copy; callers cannot poke the registry.
    scenarios = builtin_scenarios()
    scenarios.pop("fig1-baseline")
    assert get_scenario("fig1-baseline").name == "fig1-baseline"


def test_catalog_runs_converge(catalog):
    assert len(catalog) == 31
    for name, outcome in catalog.items():
        assert outcome.error is None, name
        assert outcome.result.converged, name
        assert outcome.result.iterations <= 500, name


def test_uncontrolled_high_transmission_outbreak_grows(catalog):
    outcome = catalog["fig9-nocontrol-b200"]
    ys = outcome.result.states.values
    burden = ys[:, 2] + ys[:, 3]
    assert burden[-1] / burden[0] >= 5.0
    assert ys[-1, 3] / ys[0, 3] >= 10.0


def test_highest_transmission_case(catalog):
    free = catalog["fig11-nocontrol-b250"]
    controlled = catalog["fig11-b250"]
    infectious = free.result.states.values[:, 2]
    assert np.all(np.diff(infectious) > 0.0)
    assert controlled.result.states.terminal[2] < free.result.states.terminal[2]


def test_controls_cut_terminal_burden(catalog):
    with_controls = catalog["fig1-baseline"].result.terminal_infected
    without = catalog["fig2-nocontrol"].result.terminal_infected
    assert with_controls < 0.3 * without


def test_run_scenario_writes_three_files(tmp_path):
    outcome = run_scenario(get_scenario("fig1-baseline"), tmp_path)
    assert len(outcome.files) == 3
    traj, frac, summary = (tmp_path / f"fig1-baseline{suffix}" for suffix in
                           (".csv", "_fractions.csv", "_summary.json"))
    assert [str(p) for p in (traj, frac, summary)] == list(outcome.files)

    lines = traj.read_text().splitlines()
    assert lines[0] == TRAJECTORY_HEADER
    assert len(lines) == outcome.result.states.grid.n_nodes + 1
    cells = lines[1].split(",")
    assert len(cells) == 13
    # repr formatting round-trips exactly.
    assert float(cells[0]) == 0.0
    np.testing.assert_array_equal(
        [float(c) for c in cells[1:6]], outcome.result.states.values[0]
    )

    frac_lines = frac.read_text().splitlines()
    assert frac_lines[0] == FRACTIONS_HEADER
    probe = frac_lines[101].split(",")
    n = outcome.spec.params.n_total
    for k in range(5):
        assert float(probe[1 + k]) == outcome.result.states.values[100, k] / n

    data = json.loads(summary.read_text())
    assert data["scenario"] == "fig1-baseline"
    assert data["converged"] is True
    assert data["cost_kind"] == "i_plus_l2"
    assert set(data["terminal"]) == {"S", "L1", "I", "L2", "R", "I_plus_L2"}
    assert data["terminal"]["I_plus_L2"] == outcome.result.terminal_infected
    assert data["upper_bound_durations"]["u1"] == outcome.result.u1_upper_duration
    assert "error" not in data


def test_identical_runs_produce_identical_bytes(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    first = run_scenario(get_scenario("fig1-baseline"), a)
    second = run_scenario(get_scenario("fig1-baseline"), b)
    assert len(first.files) == len(second.files) == 3
    for pa, pb in zip(sorted(a.iterdir()), sorted(b.iterdir())):
        assert pa.name == pb.name
        assert pa.read_bytes() == pb.read_bytes()


def test_config_round_trip_default(tmp_path):
    path = tmp_path / "scenario.ini"
    spec = default_spec()
    save_config(spec, path)
    assert load_config(path) == spec


def test_config_round_trip_modified(tmp_path):
    path = tmp_path / "scenario.ini"
    spec = default_spec("alt").replace(
        params=default_parameters().replace(beta=175.0, n_total=40000.0),
        weights=CostWeights(250.0, 250.0),
        cost_kind=CostKind.I_ONLY,
        u2_enabled=False,
        tolerance=1e-5,
        n_steps=1000,
        t_end=4.0,
        initial_u1=0.25,
    )
    save_config(spec, path)
    assert load_config(path) == spec


def test_empty_config_yields_the_default_spec(tmp_path):
    path = tmp_path / "empty.ini"
    path.write_text("")
    assert load_config(path) == default_spec()


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[parameters]\nbeta_typo = 1.0\n")
    with pytest.raises(ConfigError, match="beta_typo"):
        load_config(path)


def test_config_rejects_unknown_section(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[extras]\nbeta = 1.0\n")
    with pytest.raises(ConfigError, match="extras"):
        load_config(path)


def test_config_rejects_bad_values(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[parameters]\nbeta = plenty\n")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("[parameters]\neps1 = 0\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_malformed_and_missing_files(tmp_path):
    path = tmp_path / "broken.ini"
    path.write_text("beta = 1 with no section header\n")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(path)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.ini")


def test_apply_overrides():
    spec = apply_overrides(
        default_spec(),
        [
            "beta=150",
            "w1=200",
            "n_steps=100",
            "cost_kind=i_only",
            "name=alt",
            "u2_enabled=false",
            "tolerance=1e-5",
        ],
    )
    assert spec.params.beta == 150.0
    assert spec.weights.w1 == 200.0
    assert spec.n_steps == 100
    assert spec.cost_kind is CostKind.I_ONLY
    assert spec.name == "alt"
    assert spec.u2_enabled is False
    assert spec.tolerance == 1e-5


@pytest.mark.parametrize(
    "item",
    ["beta150", "beta_typo=1", "beta=abc", "eps1=0", "n_steps=2.5", "=5"],
)
def test_apply_overrides_rejects_bad_assignments(item):
    with pytest.raises(ConfigError):
        apply_overrides(default_spec(), [item])


def test_get_scenario_unknown_name_lists_choices():
    with pytest.raises(ConfigError, match="fig1-baseline"):
        get_scenario("fig99-missing")


def test_scenario_spec_validation():
    with pytest.raises(InvalidInputError):
        default_spec("../evil")
    with pytest.raises(InvalidInputError):
        default_spec("")
    with pytest.raises(InvalidInputError):
        ScenarioSpec(name="x", params=None, weights=CostWeights(1.0, 1.0))
    with pytest.raises(InvalidInputError):
        default_spec().replace(theta=0.0)


def test_sweep_names_and_values():
    base = default_spec("sw").replace(n_steps=200)
    outcomes = run_sweep(base, "beta", [75.0, 100.0])
    assert [o.spec.name for o in outcomes] == ["sw-beta-75", "sw-beta-100"]
    assert [o.spec.params.beta for o in outcomes] == [75.0, 100.0]
    both = run_sweep(base, "eps", [0.25])[0]
    assert both.spec.params.eps1 == both.spec.params.eps2 == 0.25
    heavier = run_sweep(base, "w2", [150.0])[0]
    assert heavier.spec.weights == CostWeights(500.0, 150.0)


def test_sweep_runs_are_order_independent():
    base = default_spec("sw").replace(n_steps=500)
    forward = run_sweep(base, "beta", [75.0, 100.0])
    backward = run_sweep(base, "beta", [100.0, 75.0])
    np.testing.assert_array_equal(
        forward[0].result.states.values, backward[1].result.states.values
    )
    np.testing.assert_array_equal(
        forward[1].result.controls.values, backward[0].result.controls.values
    )


def test_sweep_captures_failures_and_continues(tmp_path):
    base = default_spec("sw").replace(n_steps=50)
    outcomes = run_sweep(base, "beta", [100.0, 1e7], out_dir=tmp_path)
    assert [o.error is None for o in outcomes] == [True, False]
    assert outcomes[0].result is not None and outcomes[1].result is None
    # Exponent formatting must stay filesystem-safe.
    assert outcomes[1].spec.name == "sw-beta-1e07"
    assert "non-finite" in outcomes[1].error
    assert len(outcomes[0].files) == 3
    assert len(outcomes[1].files) == 1
    data = json.loads((tmp_path / "sw-beta-1e07_summary.json").read_text())
    assert "error" in data and "converged" not in data


def test_sweep_validation():
    base = default_spec()
    with pytest.raises(ConfigError):
        run_sweep(base, "gamma", [1.0])
    with pytest.raises(InvalidInputError):
        run_sweep(base, "beta", [])


def test_default_spec_settings():
    spec = default_spec()
    assert spec.name == "custom"
    assert spec.weights == CostWeights(500.0, 50.0)
    assert spec.params == default_parameters()
    assert spec.cost_kind is CostKind.I_PLUS_L2
    assert (spec.t_end, spec.n_steps) == (5.0, 5000)
