import numpy as np
import pytest

from weakmeas.scenarios import SCENARIOS, Check, run_scenario

ALL = sorted(SCENARIOS)


@pytest.mark.parametrize("name", ALL)
def test_all_checks_pass(name, scenario_results):
    result = scenario_results(name)
    failed = [c for c in result.checks if not c.passed]
    assert not failed, f"{name}: {[(c.name, c.expected, c.got) for c in failed]}"


@pytest.mark.parametrize("name", ALL)
def test_datasets_well_formed(name, scenario_results):
    result = scenario_results(name)
    assert result.datasets
    for columns, rows in result.datasets.values():
        assert rows.ndim == 2
        assert rows.shape[1] == len(columns)
        assert np.all(np.isfinite(rows))


@pytest.mark.parametrize("name", ALL)
def test_checks_carry_provenance(name, scenario_results):
    kinds = {"closed-form", "identity", "oracle", "statistical"}
    for check in scenario_results(name).checks:
        assert isinstance(check, Check)
        assert check.kind in kinds


def test_deterministic_given_seed():
    a = run_scenario("negative-kinetic-energy", seed=5)
    b = run_scenario("negative-kinetic-energy", seed=5)
    assert [(c.name, c.got) for c in a.checks] == [(c.name, c.got) for c in b.checks]
    for name in a.datasets:
        assert np.array_equal(a.datasets[name][1], b.datasets[name][1])


def test_monte_carlo_scenario_seed_dependence():
    a = run_scenario("overall-distribution", {"n_samples": 20000}, seed=1)
    b = run_scenario("overall-distribution", {"n_samples": 20000}, seed=2)
    got_a = [c.got for c in a.checks if c.name == "sample_std"][0]
    got_b = [c.got for c in b.checks if c.name == "sample_std"][0]
    assert got_a != got_b


def test_parameter_override():
    result = run_scenario("negative-kinetic-energy", {"q": 4.0})
    tau0 = [c for c in result.checks if c.name == "tau_zero_closed_form"][0]
    assert abs(tau0.expected - (0.5 - 8.0)) < 1e-12
    assert tau0.passed


def test_tolerance_scale_rescores():
    result = run_scenario("negative-kinetic-energy", tolerance_scale=1e-12)
    assert not result.all_passed


def test_runtime_budget(scenario_results):
    # every scenario finishes well inside the 30 s single-core budget
    for name in ALL:
        scenario_results(name)
        assert scenario_results.timing(name) < 30.0
