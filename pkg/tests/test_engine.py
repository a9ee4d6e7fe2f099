from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import make_case, make_node, make_profiles
from stratgrid import dispatch, engine, randomized
from stratgrid.errors import ConservationViolation, PlanMismatch, ScenarioMismatch
from stratgrid.scenario import load_scenario


@pytest.fixture(scope="module")
def case_study():
    s = load_scenario("case_study")
    from stratgrid.profiles import compute_profiles
    p = compute_profiles(s)
    coop = engine.simulate(s, dispatch.solve_cooperative(s, p), p)
    indep = engine.simulate(s, dispatch.independent_baseline(s, p), p)
    return s, p, coop, indep


def test_replay_of_lp_plan_is_clean(case_study):
    s, p, coop, _ = case_study
    assert np.abs(coop.residual_wh).max() <= 1e-9 * max(1.0, p.load_wh.max())
    assert coop.soc.min() >= 0.2 - 1e-9 and coop.soc.max() <= 1.0 + 1e-9


def test_tampered_transfer_is_caught(case_study):
    s, p, coop, _ = case_study
    t = int(np.argmax(coop.plan.transfer_wh[0]))
    inflated = coop.plan.transfer_wh.copy()
    inflated[0, t] *= 1.1
    with pytest.raises(ConservationViolation) as err:
        engine.simulate(s, replace(coop.plan, transfer_wh=inflated), p)
    assert err.value.step == t


def test_tampered_energy_is_caught(case_study):
    s, p, coop, _ = case_study
    energy = coop.plan.energy_wh.copy()
    energy[1, 5] += 1.0
    with pytest.raises(ConservationViolation):
        engine.simulate(s, replace(coop.plan, energy_wh=energy), p)


def test_plan_for_another_scenario_is_rejected(case_study):
    s, p, coop, _ = case_study
    other = replace(s, nodes=s.nodes[:2], links=s.links[:1])
    with pytest.raises(PlanMismatch):
        engine.simulate(other, coop.plan)
    with pytest.raises(PlanMismatch):
        engine.simulate(s, replace(coop.plan, ground_wh=coop.plan.ground_wh[:, :5]), p)


def test_independent_replay_needs_night_ground_everywhere(case_study):
    s, p, _, indep = case_study
    report = engine.compare(*case_study[2:])
    night = list(report.night_steps)
    assert night
    assert np.all(indep.plan.ground_wh[:, night].sum(axis=1) > 0)


def test_identical_inputs_reduce_nothing(case_study):
    _, _, coop, indep = case_study
    assert engine.compare(coop, coop).reduction_fraction == 0.0
    assert engine.compare(indep, indep).reduction_fraction == 0.0


def test_zero_independent_objective_is_degenerate():
    s = make_case([make_node()], steps=2)
    p = make_profiles([[0, 0]], [[0, 0]])
    a = engine.simulate(s, dispatch.solve_cooperative(s, p), p)
    b = engine.simulate(s, dispatch.independent_baseline(s, p), p)
    r = engine.compare(a, b)
    assert r.reduction_fraction == 0.0 and r.degenerate


def test_compare_rejects_different_scenarios(case_study):
    _, _, coop, _ = case_study
    s = make_case([make_node()], steps=2)
    p = make_profiles([[0, 0]], [[0, 0]])
    other = engine.simulate(s, dispatch.independent_baseline(s, p), p)
    with pytest.raises(ScenarioMismatch):
        engine.compare(coop, other)


def test_cluster_ledger_balances(case_study):
    for result in case_study[2:]:
        led = result.ledger
        assert abs(led.imbalance) <= 1e-9 * led.scale


def test_csv_layout_and_determinism(case_study):
    s, p, coop, _ = case_study
    text = engine.to_csv(coop)
    lines = text.splitlines()
    assert lines[0] == ",".join(engine.CSV_COLUMNS)
    assert len(lines) == 1 + 3 * 24
    again = engine.to_csv(engine.simulate(s, dispatch.solve_cooperative(s, p), p))
    assert again == text


def test_powers_are_step_averages():
    s = make_case([make_node(capacity=1000.0)], steps=2)
    s = replace(s, horizon_hours=1.0, timestep_hours=0.5)
    p = make_profiles([[100, 0]], [[50, 50]])
    r = engine.simulate(s, dispatch.independent_baseline(s, p), p)
    np.testing.assert_allclose(r.power_series()["gen_w"], [[200, 0]])


def test_summary_and_report_text(case_study):
    _, _, coop, indep = case_study
    assert "objective_wh" in engine.summary_text(coop)
    text = engine.report_text(engine.compare(coop, indep))
    assert text.startswith("cooperative_objective_wh:")
    assert "reduction_fraction" in text


@given(seed=st.integers(0, 2**32 - 1))
def test_every_plan_replays(seed):
    s, p = randomized.dominance_instance(np.random.default_rng(seed))
    for plan in (dispatch.solve_cooperative(s, p), dispatch.independent_baseline(s, p)):
        r = engine.simulate(s, plan, p)
        assert abs(r.ledger.imbalance) <= 1e-9 * r.ledger.scale
