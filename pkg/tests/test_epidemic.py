import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eocsim import (
    Action,
    ActionType,
    DiseaseParams,
    EffectSet,
    HealthState,
    InvalidPlanError,
    Plan,
    ScenarioConfig,
    World,
    census,
    effects_for_day,
    run_round,
    step_day,
    summarize,
)
from eocsim.epidemic import IDENTITY_EFFECTS, EpidemicTrace
from eocsim.situation import Situation


def task(kind, from_day, to_day, amount=100, efficacy=0.75, cost=0.0):
    return Action(kind, amount, cost, from_day, to_day, efficacy)


def plan_of(*tasks):
    return Plan(id=0, certainty=0.0, tasks=tuple(tasks))


# ---------------------------------------------------------------- census

def test_census_initial_world():
    world = World.initial(1000, 3, DiseaseParams(), seed=1)
    assert census(world).counts() == (997, 0, 3, 0, 0, 0, 0)


def test_census_empty_world():
    world = World.initial(0, 0, DiseaseParams(), seed=1)
    assert census(world).counts() == (0, 0, 0, 0, 0, 0, 0)


def test_census_all_dead():
    world = World.initial(25, 0, DiseaseParams(), seed=1)
    world.states[:] = HealthState.DEAD
    assert census(world).counts() == (0, 0, 0, 0, 0, 0, 25)


def test_census_sums_to_population():
    world = World.initial(500, 7, DiseaseParams(), seed=3)
    assert census(world).total == 500


def test_persons_view_matches_census():
    world = World.initial(50, 4, DiseaseParams(), seed=3)
    world = step_day(world)
    records = world.persons()
    assert [r[0] for r in records] == list(range(50))
    by_state: dict[HealthState, int] = {}
    for _, state, days in records:
        by_state[state] = by_state.get(state, 0) + 1
        assert days >= 0
    snapshot = census(world)
    assert by_state.get(HealthState.INFECTIOUS, 0) == snapshot.i
    assert by_state.get(HealthState.SUSCEPTIBLE, 0) == snapshot.s


# ---------------------------------------------------------------- effects

def test_empty_plan_gives_identity():
    assert effects_for_day(Plan.empty(), 0) == IDENTITY_EFFECTS
    assert effects_for_day(Plan.empty(), 49).is_identity


def test_quarantine_window():
    plan = plan_of(task(ActionType.QUARANTINING, 29, 31, efficacy=0.75))
    inside = effects_for_day(plan, 30)
    assert inside.extra_isolation_prob == pytest.approx(0.75)
    assert inside.contact_scale == 1.0 and inside.transmission_scale == 1.0
    assert effects_for_day(plan, 32).is_identity
    assert effects_for_day(plan, 28).is_identity


def test_stacked_targeted_distancing():
    # Each task scales contacts by 1 - 1.0 * 0.3 = 0.7; two overlapping
    # tasks compose multiplicatively: 0.7 * 0.7 = 0.49 (hand fold).
    t = task(ActionType.TARGETED_SOCIAL_DISTANCING, 5, 15, efficacy=1.0)
    stacked = plan_of(t, t)
    assert effects_for_day(stacked, 10).contact_scale == pytest.approx(0.49)
    assert effects_for_day(stacked, 4).contact_scale == 1.0


def test_mass_distancing_full_coverage():
    plan = plan_of(task(ActionType.MASS_SOCIAL_DISTANCING, 0, 9, efficacy=0.75))
    assert effects_for_day(plan, 5).contact_scale == pytest.approx(0.25)


def test_awareness_scales_transmission():
    plan = plan_of(task(ActionType.AWARENESS, 0, 9, efficacy=0.6))
    eff = effects_for_day(plan, 3)
    assert eff.transmission_scale == pytest.approx(0.4)
    assert eff.contact_scale == 1.0


def test_vaccination_spreads_doses_over_interval():
    plan = plan_of(task(ActionType.MASS_VACCINATION, 10, 14, amount=23, efficacy=0.75))
    daily = [effects_for_day(plan, d).vaccinations_per_day for d in range(10, 15)]
    assert sum(daily) == 23
    assert daily == [5, 5, 5, 4, 4]  # remainder lands on the first days
    assert effects_for_day(plan, 12).vaccine_efficacy == pytest.approx(0.75)


def test_isolation_addition_saturates():
    q = task(ActionType.QUARANTINING, 0, 9, efficacy=0.8)
    plan = plan_of(q, q)
    assert effects_for_day(plan, 0).extra_isolation_prob == 1.0


def test_malformed_interval_rejected():
    bad = Action(ActionType.AWARENESS, 10, 0.0, 9, 4, 0.5)
    with pytest.raises(InvalidPlanError, match="reversed"):
        effects_for_day(plan_of(bad), 0)


@settings(max_examples=50)
@given(st.permutations(range(6)), st.integers(min_value=0, max_value=20))
def test_effect_folding_order_independent(order, day):
    tasks = [
        task(ActionType.TARGETED_SOCIAL_DISTANCING, 0, 10, efficacy=0.71),
        task(ActionType.MASS_SOCIAL_DISTANCING, 3, 12, efficacy=0.13),
        task(ActionType.AWARENESS, 0, 20, efficacy=0.37),
        task(ActionType.QUARANTINING, 5, 15, efficacy=0.29),
        task(ActionType.MASS_VACCINATION, 2, 9, amount=97, efficacy=0.55),
        task(ActionType.TARGETED_VACCINATION, 0, 6, amount=31, efficacy=0.75),
    ]
    base = effects_for_day(plan_of(*tasks), day)
    permuted = effects_for_day(plan_of(*(tasks[i] for i in order)), day)
    assert base == permuted


# ---------------------------------------------------------------- stepping

def test_step_noop_without_infection():
    world = World.initial(100, 0, DiseaseParams(), seed=5)
    world.states[:10] = HealthState.RECOVERED
    world.states[10:20] = HealthState.IMMUNIZED
    after = step_day(world)
    assert census(after).counts() == census(world).counts()


def test_step_all_susceptible_infected_in_forced_limit():
    params = DiseaseParams(contacts_per_day=1000, transmission_prob=1.0,
                           incubation_days=2, infectious_days=3)
    world = World.initial(20, 10, params, seed=7)
    after = step_day(world)
    assert census(after).e == 10
    assert census(after).s == 0


def test_step_total_lockdown_blocks_all_infection():
    params = DiseaseParams(transmission_prob=1.0, contacts_per_day=50)
    world = World.initial(200, 50, params, seed=11)
    lockdown = EffectSet(contact_scale=0.0)
    for _ in range(20):
        world = step_day(world, lockdown)
        assert census(world).e == 0


def test_step_determinism_bit_identical():
    world = World.initial(300, 5, DiseaseParams(), seed=13)
    once = step_day(world)
    twice = step_day(world)
    assert once.same_state(twice)
    assert not once.same_state(world)


def test_step_does_not_mutate_input():
    world = World.initial(100, 5, DiseaseParams(), seed=17)
    snapshot = world.states.copy()
    state_before = world.rng.bit_generator.state
    step_day(world)
    assert np.array_equal(world.states, snapshot)
    assert world.rng.bit_generator.state == state_before


def test_vaccination_moves_susceptibles_to_immunized():
    params = DiseaseParams(transmission_prob=0.0)
    world = World.initial(100, 0, params, seed=19)
    effects = EffectSet(vaccinations_per_day=30, vaccine_efficacy=1.0)
    after = step_day(world, effects)
    assert census(after).im == 30
    assert census(after).s == 70


# ---------------------------------------------------------------- rounds

def test_run_round_duration_zero():
    trace = run_round(ScenarioConfig(duration_days=1), Plan.empty(), duration=0)
    assert len(trace) == 1
    assert trace.situations[0].counts() == (997, 0, 3, 0, 0, 0, 0)


def test_run_round_trace_length_and_conservation():
    config = ScenarioConfig(population=400, initial_infected=3, duration_days=30)
    trace = run_round(config, Plan.empty())
    assert len(trace) == 31
    for sit in trace.situations:
        assert sit.total == 400


def test_run_round_monotone_absorbers():
    config = ScenarioConfig(population=600, initial_infected=5, duration_days=40)
    trace = run_round(config, Plan.empty())
    for before, after in zip(trace.situations, trace.situations[1:]):
        assert after.d >= before.d
        assert after.r + after.im >= before.r + before.im


def test_run_round_deterministic():
    config = ScenarioConfig(population=500, initial_infected=4, duration_days=25, seed=99)
    a = run_round(config, Plan.empty())
    b = run_round(config, Plan.empty())
    assert [s.counts() for s in a.situations] == [s.counts() for s in b.situations]


def test_run_round_total_cost_is_task_sum():
    tasks = (
        Action(ActionType.TARGETED_SOCIAL_DISTANCING, 50, 410.5, 7, 38, 0.75),
        Action(ActionType.MASS_VACCINATION, 200, 88.25, 38, 50, 0.75),
        Action(ActionType.QUARANTINING, 80, 123.125, 29, 31, 0.75),
    )
    trace = run_round(ScenarioConfig(duration_days=50), Plan(0, 0.0, tasks))
    assert trace.total_cost == pytest.approx(410.5 + 88.25 + 123.125)


def test_parallel_rounds_do_not_interfere():
    from concurrent.futures import ThreadPoolExecutor
    config = ScenarioConfig(population=300, initial_infected=3, duration_days=20)
    solo = [run_round(config, Plan.empty(), seed=s) for s in range(4)]
    with ThreadPoolExecutor(max_workers=4) as pool:
        threaded = list(pool.map(
            lambda s: run_round(config, Plan.empty(), seed=s), range(4)))
    for a, b in zip(solo, threaded):
        assert [x.counts() for x in a.situations] == [x.counts() for x in b.situations]


# ---------------------------------------------------------------- summaries

def _trace_from_prevalences(prevalences, population=100):
    situations = [Situation(s=population - p, i=p) for p in prevalences]
    return EpidemicTrace(situations=situations, total_cost=0.0, population=population)


def test_summarize_peak_by_construction():
    summary = summarize(_trace_from_prevalences([3, 5, 9, 5, 3]))
    assert summary.peak_day == 2
    assert summary.peak_prevalence == pytest.approx(9 / 100)


def test_summarize_degenerate_all_zero():
    summary = summarize(_trace_from_prevalences([0, 0, 0]))
    assert summary.peak_day == 0
    assert summary.peak_prevalence == 0.0


def test_summarize_tie_takes_earliest():
    summary = summarize(_trace_from_prevalences([3, 9, 9, 3]))
    assert summary.peak_day == 1


def test_summarize_attack_and_deaths():
    final = Situation(s=100, e=10, i=20, ii=5, r=50, im=10, d=5)
    trace = EpidemicTrace(situations=[Situation(s=200), final],
                          total_cost=12.0, population=200)
    summary = summarize(trace)
    assert summary.attack_fraction == pytest.approx((10 + 20 + 5 + 50 + 5) / 200)
    assert summary.deaths == 5
    assert summary.total_cost == 12.0
