"""Immune-style plan search over the intervention resource pool.

Candidate plans are composed at random from the pool (the gene library),
scored by simulating the round they would produce, and refined by
copy-and-mutate of the best candidates. Mutation intensity is one minus a
candidate's score, so weak plans are reshaped aggressively while strong
ones receive fine touches. The search stops as soon as a plan clears the
acceptability threshold or the generation budget runs out.

Scoring ("successfulness") is the relative reduction of peak prevalence
against an uncontrolled run of the same scenario, discounted by plan cost:

    max(0, (peak_base - peak_plan) / peak_base) / (1 + cost / 5000)

clamped to [0, 1]. The empty plan therefore scores exactly 0. Scoring runs
use a fixed evaluation seed derived from the scenario seed (never the
deployment seed), so planning is deterministic without being tuned to the
exact stochastic path it will later face.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable

import numpy as np

from .epidemic import run_round, summarize
from .memory import MemoryCase
from .plans import Action, ActionType, Plan, ResourcePool, action_cost
from .situation import Situation

if TYPE_CHECKING:
    from .config import ScenarioConfig

COST_SCALE = 5000.0
EVAL_SEED_OFFSET = 10_007
DEFAULT_MAX_TASKS = 10
_INTERVAL_NUDGE = 5  # max days an edit moves or resizes a task interval


class EmptyPoolError(ValueError):
    """The resource pool offers nothing to compose a plan from."""


@dataclass(frozen=True)
class SearchBudget:
    generations: int = 20
    population_size: int = 10
    clones_per_elite: int = 3
    acceptable_successfulness: float = 0.3

    def __post_init__(self) -> None:
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.clones_per_elite < 1:
            raise ValueError("clones_per_elite must be >= 1")


def _remaining_availability(pool: ResourcePool, tasks: list[Action]) -> dict[ActionType, int]:
    remaining = {t: pool.template(t).available for t in pool.action_types()}
    for task in tasks:
        remaining[task.action_type] -= task.amount
    return remaining


def _concurrent_count(tasks: list[Action], kind: ActionType, from_day: int, to_day: int) -> int:
    probe = Action(kind, 0, 0.0, from_day, to_day, 0.0)
    return sum(1 for t in tasks if t.action_type is kind and t.overlaps(probe))


def _draw_task(pool: ResourcePool, horizon: int, tasks: list[Action],
               remaining: dict[ActionType, int], rng: np.random.Generator) -> Action | None:
    feasible = [t for t in pool.action_types() if remaining[t] >= 1]
    while feasible:
        kind = feasible[int(rng.integers(len(feasible)))]
        template = pool.template(kind)
        placed = None
        for _ in range(8):  # bounded retries against the concurrency cap
            from_day = int(rng.integers(0, horizon + 1))
            to_day = int(rng.integers(from_day, horizon + 1))
            if _concurrent_count(tasks, kind, from_day, to_day) < template.max_concurrent:
                placed = (from_day, to_day)
                break
        if placed is None:
            feasible.remove(kind)
            continue
        from_day, to_day = placed
        amount = int(rng.integers(1, remaining[kind] + 1))
        remaining[kind] -= amount
        cost = action_cost(kind, amount, from_day, to_day, template.unit_cost)
        return Action(kind, amount, cost, from_day, to_day, template.efficacy)
    return None


def generate_plan(pool: ResourcePool, horizon: int, rng: np.random.Generator,
                  plan_id: int = 0, max_tasks: int = DEFAULT_MAX_TASKS) -> Plan:
    """Bone-marrow composition: draw 1..max_tasks random tasks from the pool.

    Every drawn task respects the pool's availability and concurrency caps
    and carries the template's efficacy and cost rule.
    """
    if pool.is_empty:
        raise EmptyPoolError("cannot generate a plan from an empty resource pool")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    target = int(rng.integers(1, max_tasks + 1))
    tasks: list[Action] = []
    remaining = _remaining_availability(pool, tasks)
    for _ in range(target):
        task = _draw_task(pool, horizon, tasks, remaining, rng)
        if task is None:
            break
        tasks.append(task)
    if not tasks:
        raise EmptyPoolError("resource pool has no grantable capacity left")
    return Plan(id=plan_id, certainty=0.0, tasks=tuple(tasks))


def _recost(task: Action, pool: ResourcePool) -> Action:
    unit = pool.template(task.action_type).unit_cost
    return replace(task, cost=action_cost(task.action_type, task.amount,
                                          task.from_day, task.to_day, unit))


def _replace_if_within_cap(tasks: list[Action], idx: int, candidate: Action,
                           pool: ResourcePool) -> None:
    # A moved window must not pile past the template's concurrency cap;
    # violating edits degrade to no-ops.
    cap = pool.template(candidate.action_type).max_concurrent
    others = [t for n, t in enumerate(tasks) if n != idx]
    if _concurrent_count(others, candidate.action_type,
                         candidate.from_day, candidate.to_day) < cap:
        tasks[idx] = _recost(candidate, pool)


def _edit_shift(tasks: list[Action], pool: ResourcePool, horizon: int,
                remaining: dict[ActionType, int], rng: np.random.Generator) -> None:
    idx = int(rng.integers(len(tasks)))
    delta = int(rng.integers(1, _INTERVAL_NUDGE + 1)) * (1 if rng.random() < 0.5 else -1)
    _replace_if_within_cap(tasks, idx, tasks[idx].shifted(delta, horizon), pool)


def _edit_resize(tasks: list[Action], pool: ResourcePool, horizon: int,
                 remaining: dict[ActionType, int], rng: np.random.Generator) -> None:
    idx = int(rng.integers(len(tasks)))
    task = tasks[idx]
    delta = int(rng.integers(1, _INTERVAL_NUDGE + 1)) * (1 if rng.random() < 0.5 else -1)
    if rng.random() < 0.5:
        from_day = min(max(task.from_day + delta, 0), task.to_day)
        task = replace(task, from_day=from_day)
    else:
        to_day = min(max(task.to_day + delta, task.from_day), horizon)
        task = replace(task, to_day=to_day)
    _replace_if_within_cap(tasks, idx, task, pool)


def _edit_swap(tasks: list[Action], pool: ResourcePool, horizon: int,
               remaining: dict[ActionType, int], rng: np.random.Generator) -> None:
    idx = int(rng.integers(len(tasks)))
    task = tasks[idx]
    others = [t for t in pool.action_types() if t is not task.action_type and remaining[t] >= 1]
    if not others:
        _edit_shift(tasks, pool, horizon, remaining, rng)
        return
    kind = others[int(rng.integers(len(others)))]
    template = pool.template(kind)
    if _concurrent_count([t for n, t in enumerate(tasks) if n != idx], kind,
                         task.from_day, task.to_day) >= template.max_concurrent:
        _edit_shift(tasks, pool, horizon, remaining, rng)
        return
    remaining[task.action_type] += task.amount
    amount = int(rng.integers(1, remaining[kind] + 1))
    remaining[kind] -= amount
    swapped = Action(kind, amount, 0.0, task.from_day, task.to_day, template.efficacy)
    tasks[idx] = _recost(swapped, pool)


def _edit_add(tasks: list[Action], pool: ResourcePool, horizon: int,
              remaining: dict[ActionType, int], rng: np.random.Generator) -> None:
    task = _draw_task(pool, horizon, tasks, remaining, rng)
    if task is None:
        _edit_shift(tasks, pool, horizon, remaining, rng)
        return
    tasks.append(task)


def _edit_remove(tasks: list[Action], pool: ResourcePool, horizon: int,
                 remaining: dict[ActionType, int], rng: np.random.Generator) -> None:
    if len(tasks) <= 1:  # a plan never shrinks below one task
        _edit_shift(tasks, pool, horizon, remaining, rng)
        return
    idx = int(rng.integers(len(tasks)))
    removed = tasks.pop(idx)
    remaining[removed.action_type] += removed.amount


_EDIT_OPS = (_edit_shift, _edit_resize, _edit_swap, _edit_add, _edit_remove)


def edit_count(intensity: float, task_count: int) -> int:
    """Number of random edits one mutation pass applies."""
    if not 0.0 <= intensity <= 1.0:
        raise ValueError("intensity must be within [0, 1]")
    return math.ceil(intensity * task_count)


def mutate(plan: Plan, pool: ResourcePool, intensity: float, rng: np.random.Generator,
           *, horizon: int, plan_id: int | None = None) -> Plan:
    """Apply `edit_count` random edits to a copy of the plan.

    Edits shift or resize an interval, swap a task to another pool template,
    add a task, or remove one; every edit keeps the plan inside the gene
    library and the pool's availability. Intensity 0 returns the plan
    unchanged except for its id (hypermutation is inversely tied to
    affinity, so strong plans mutate gently).
    """
    new_id = plan.id + 1 if plan_id is None else plan_id
    tasks = list(plan.tasks)
    remaining = _remaining_availability(pool, tasks)
    for _ in range(edit_count(intensity, len(tasks))):
        op = _EDIT_OPS[int(rng.integers(len(_EDIT_OPS)))]
        op(tasks, pool, horizon, remaining, rng)
    return Plan(id=new_id, certainty=plan.certainty, tasks=tuple(tasks))


def successfulness_score(baseline_peak: float, planned_peak: float, cost: float) -> float:
    if baseline_peak <= 0.0:
        improvement = 0.0
    else:
        improvement = max(0.0, (baseline_peak - planned_peak) / baseline_peak)
    score = improvement / (1.0 + cost / COST_SCALE)
    return min(1.0, max(0.0, score))


def baseline_peak_prevalence(initial: Situation, config: "ScenarioConfig",
                             duration: int | None = None) -> float:
    """Peak prevalence of the uncontrolled evaluation run from `initial`."""
    trace = run_round(config, Plan.empty(), seed=config.seed + EVAL_SEED_OFFSET,
                      initial=initial, duration=duration)
    return summarize(trace).peak_prevalence


def evaluate(plan: Plan, initial: Situation, config: "ScenarioConfig", *,
             duration: int | None = None, baseline_peak: float | None = None) -> float:
    """Successfulness of `plan` against the uncontrolled counterfactual.

    Both runs start from `initial` and use the evaluation seed, so repeated
    calls with the same arguments agree exactly. `baseline_peak` lets a
    caller reuse the (identical) uncontrolled run across many evaluations.
    """
    if baseline_peak is None:
        baseline_peak = baseline_peak_prevalence(initial, config, duration)
    trace = run_round(config, plan, seed=config.seed + EVAL_SEED_OFFSET,
                      initial=initial, duration=duration)
    planned_peak = summarize(trace).peak_prevalence
    return successfulness_score(baseline_peak, planned_peak, plan.total_cost)


def plan_certainty(retrieved: tuple[MemoryCase, int] | None, match_radius: int = 30) -> float:
    """Confidence in a retrieved plan: its score halved per match radius of distance."""
    if retrieved is None:
        return 0.0
    case, dist = retrieved
    if match_radius <= 0:
        return case.successfulness if dist == 0 else 0.0
    return case.successfulness * 2.0 ** (-dist / match_radius)


def clonal_select(initial: Situation, pool: ResourcePool, budget: SearchBudget,
                  config: "ScenarioConfig", rng: np.random.Generator, *,
                  horizon: int | None = None, max_tasks: int = DEFAULT_MAX_TASKS,
                  threads: int | None = None,
                  on_generation: Callable[[int, float], None] | None = None,
                  ) -> tuple[Plan, float]:
    """Search the pool for an acceptable plan; return the best ever found.

    Each generation keeps the elite top half, fills the freed slots with
    mutated clones of the elites (round-robin, at most clones_per_elite
    each, intensity = 1 - elite score), and tops up with fresh random
    plans when clones cannot fill the population. The best-ever score
    never decreases across generations. Evaluations are independent; with
    `threads` they run in a pool and are reduced in index order, so the
    outcome is seed-stable regardless of parallelism.
    """
    if pool.is_empty:
        raise EmptyPoolError("cannot search an empty resource pool")
    if horizon is None:
        horizon = config.duration_days
    baseline_peak = baseline_peak_prevalence(initial, config, horizon)

    next_id = 0

    def fresh_plan() -> Plan:
        nonlocal next_id
        plan = generate_plan(pool, horizon, rng, plan_id=next_id, max_tasks=max_tasks)
        next_id += 1
        return plan

    def score_all(plans: list[Plan]) -> list[float]:
        def one(plan: Plan) -> float:
            return evaluate(plan, initial, config, duration=horizon,
                            baseline_peak=baseline_peak)
        if threads and threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool_:
                return list(pool_.map(one, plans))
        return [one(plan) for plan in plans]

    population: list[tuple[Plan, float | None]] = [
        (fresh_plan(), None) for _ in range(budget.population_size)
    ]
    best: tuple[Plan, float] | None = None

    for generation in range(1, budget.generations + 1):
        pending = [plan for plan, score in population if score is None]
        new_scores = iter(score_all(pending))
        population = [
            (plan, score if score is not None else next(new_scores))
            for plan, score in population
        ]
        population.sort(key=lambda entry: (-entry[1], entry[0].id))
        top_plan, top_score = population[0]
        if best is None or top_score > best[1]:
            best = (top_plan, top_score)
        if on_generation is not None:
            on_generation(generation, best[1])
        if best[1] >= budget.acceptable_successfulness:
            break
        if generation == budget.generations:
            break

        elites = population[: max(1, budget.population_size // 2)]
        slots = budget.population_size - len(elites)
        clones: list[tuple[Plan, None]] = []
        for lap in range(budget.clones_per_elite):
            for plan, score in elites:
                if len(clones) >= slots:
                    break
                clone = mutate(plan, pool, 1.0 - score, rng, horizon=horizon,
                               plan_id=next_id)
                next_id += 1
                clones.append((clone, None))
            if len(clones) >= slots:
                break
        population = list(elites) + clones
        while len(population) < budget.population_size:
            population.append((fresh_plan(), None))

    assert best is not None
    return best
