"""Multi-agent emergency-operations-center layer over the epidemic engine.

One EOC runs a 2-hour message clock across a simulation round:

  * operational agents report the census every 6 hours (hours 0/6/12/18),
  * the communication agent aggregates 2 hours after each report batch,
  * an aggregate seen while monitoring classifies the environment; ongoing
    infection is non-self and starts a response,
  * the decision maker decides at hour 4: reuse the nearest remembered plan
    when one matches closely enough, otherwise run the clonal plan search,
  * the communication agent allocates plan tasks round-robin to tactical
    agents 4 hours after the plan goes out,
  * at the mid-round checkpoint an underperforming response is abandoned
    and replaced (the failed plan is never remembered),
  * at round end the deployed response is scored against the uncontrolled
    counterfactual and retained as one new memory case.

The control-loop state machine is explicit; every round's log replays
through `control_step` without illegal transitions, which the test suite
uses as a protocol conformance check. A round is single-threaded by
contract; parallelism lives inside plan evaluation only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

import numpy as np

from .config import SEARCH_SEED_OFFSET, ScenarioConfig
from .epidemic import (
    TICKS_PER_DAY,
    EpidemicTrace,
    RoundSummary,
    World,
    census,
    effects_for_day,
    run_round,
    step_day,
    summarize,
)
from .memory import MemoryStore
from .planner import clonal_select, plan_certainty, successfulness_score
from .plans import Action, Plan
from .situation import SelfPolicy, Situation, is_nonself


class AgentRole(Enum):
    OPERATIONAL = "Operational"
    TACTICAL = "Tactical"
    TACTICAL_COMMUNICATION = "TacticalCommunication"
    DECISION_MAKING = "DecisionMaking"


# Within one 2-hour tick, activities are processed in this role order.
ROLE_PRIORITY = {
    AgentRole.OPERATIONAL: 0,
    AgentRole.TACTICAL_COMMUNICATION: 1,
    AgentRole.DECISION_MAKING: 2,
    AgentRole.TACTICAL: 3,
}

REPORT_HOURS = (0, 6, 12, 18)
AGGREGATE_HOURS = (2, 8, 14, 20)
DECISION_HOUR = 4
ALLOCATION_HOUR = 8


class ControlLoopState(Enum):
    MONITORING = "Monitoring"
    DETECTED = "Detected"
    MATCHED = "Matched"
    MATCH_FAILED = "MatchFailed"
    HELP_REQUESTED = "HelpRequested"
    MUTATING = "Mutating"
    CLONING = "Cloning"
    RETAINED = "Retained"
    IGNORED = "Ignored"


class ControlEvent(Enum):
    NO_CHANGE = "no_change"
    NONSELF_DETECTED = "nonself_detected"
    MEMORY_MATCH = "memory_match"
    MEMORY_MISS = "memory_miss"
    PLAN_FOUND = "plan_found"
    PLAN_DEPLOYED = "plan_deployed"
    RESPONSE_SUCCEEDED = "response_succeeded"
    RESPONSE_FAILED = "response_failed"


class IllegalTransitionError(RuntimeError):
    """A (state, event) pair outside the control loop; a programming error."""


# The re-detection of a still-unhandled pathogen (NONSELF_DETECTED) is what
# escalates a failed match to the decision maker and what restarts mutation
# after an ignored response.
_TRANSITIONS: dict[tuple[ControlLoopState, ControlEvent], ControlLoopState] = {
    (ControlLoopState.MONITORING, ControlEvent.NO_CHANGE): ControlLoopState.MONITORING,
    (ControlLoopState.MONITORING, ControlEvent.NONSELF_DETECTED): ControlLoopState.DETECTED,
    (ControlLoopState.DETECTED, ControlEvent.MEMORY_MATCH): ControlLoopState.MATCHED,
    (ControlLoopState.DETECTED, ControlEvent.MEMORY_MISS): ControlLoopState.MATCH_FAILED,
    (ControlLoopState.MATCH_FAILED, ControlEvent.NONSELF_DETECTED): ControlLoopState.HELP_REQUESTED,
    (ControlLoopState.HELP_REQUESTED, ControlEvent.NONSELF_DETECTED): ControlLoopState.MUTATING,
    (ControlLoopState.MUTATING, ControlEvent.PLAN_FOUND): ControlLoopState.CLONING,
    (ControlLoopState.MATCHED, ControlEvent.PLAN_FOUND): ControlLoopState.CLONING,
    (ControlLoopState.CLONING, ControlEvent.PLAN_DEPLOYED): ControlLoopState.CLONING,
    (ControlLoopState.CLONING, ControlEvent.RESPONSE_SUCCEEDED): ControlLoopState.RETAINED,
    (ControlLoopState.CLONING, ControlEvent.RESPONSE_FAILED): ControlLoopState.IGNORED,
    (ControlLoopState.RETAINED, ControlEvent.NO_CHANGE): ControlLoopState.MONITORING,
    (ControlLoopState.IGNORED, ControlEvent.NONSELF_DETECTED): ControlLoopState.MUTATING,
}


def control_step(state: ControlLoopState, event: ControlEvent | str) -> ControlLoopState:
    """Advance the response control loop; unknown pairs fail loudly."""
    if isinstance(event, str):
        event = ControlEvent(event)
    try:
        return _TRANSITIONS[(state, event)]
    except KeyError:
        raise IllegalTransitionError(
            f"no transition from {state.value} on {event.value}"
        ) from None


def agent_role(agent_name: str) -> AgentRole:
    """Role of an agent from its log name (e.g. ``Operational_2_Cairo``)."""
    if agent_name.startswith("Operational_"):
        return AgentRole.OPERATIONAL
    if agent_name.startswith("TacticalCommunication"):
        return AgentRole.TACTICAL_COMMUNICATION
    if agent_name.startswith("CrisisManager"):
        return AgentRole.DECISION_MAKING
    if agent_name.startswith("Tactical_"):
        return AgentRole.TACTICAL
    raise ValueError(f"unknown agent name {agent_name!r}")


@dataclass(frozen=True)
class Activity:
    role: AgentRole
    kind: str


def schedule(day: int, hour: int, *, plan_days: Iterable[int] = (0,),
             checkpoint_days: Iterable[int] = ()) -> list[Activity]:
    """Agent activities due at one 2-hour tick of the EOC clock.

    `plan_days` are days with a plan emission (decision at hour 4, task
    allocation at hour 8); `checkpoint_days` add a deployed-plan review at
    hour 4. Re-planning days are injected by the round driver as they occur.
    """
    if hour % 2 != 0 or not 0 <= hour <= 22:
        raise ValueError(f"hour {hour} is not on the 2-hour clock")
    if day < 0:
        raise ValueError("day must be >= 0")
    due: list[Activity] = []
    if hour in REPORT_HOURS:
        due.append(Activity(AgentRole.OPERATIONAL, "report"))
    if hour in AGGREGATE_HOURS:
        due.append(Activity(AgentRole.TACTICAL_COMMUNICATION, "aggregate"))
    if hour == DECISION_HOUR and day in checkpoint_days:
        due.append(Activity(AgentRole.DECISION_MAKING, "checkpoint"))
    if hour == DECISION_HOUR and day in plan_days:
        due.append(Activity(AgentRole.DECISION_MAKING, "decide"))
    if hour == ALLOCATION_HOUR and day in plan_days:
        due.append(Activity(AgentRole.TACTICAL_COMMUNICATION, "allocate"))
    return due


# Log line vocabulary (the Action Description column).
DESC_REPORT = "Reporting disease spread situation"
DESC_AGGREGATE = "Reporting disease and resource situation"
DESC_DISTRIBUTE = "Distributing plan for execution"
DESC_ALLOCATE = "Allocating tasks to tactical agents"
DESC_REVIEW = "Reviewing deployed plan"
DESC_TASK_STATUS = "Reporting task execution status"
DESC_PLAN_STATUS = "Reporting plan execution status"
DESC_STORE = "Storing memory case"
DESC_COMPLETE = "Round completed"


def _validate_clock(day: int, hour: int) -> None:
    if day < 0:
        raise ValueError("message day must be >= 0")
    if hour % 2 != 0 or not 0 <= hour <= 22:
        raise ValueError(f"message hour {hour} is not on the 2-hour clock")


@dataclass(frozen=True)
class SituationReport:
    report_id: int
    situation: Situation
    sender: str
    day: int
    hour: int

    def __post_init__(self) -> None:
        _validate_clock(self.day, self.hour)


@dataclass(frozen=True)
class AggregatedReport:
    situation_id: int
    reference_report_id: int
    situation: Situation
    nonself: bool
    day: int
    hour: int

    def __post_init__(self) -> None:
        _validate_clock(self.day, self.hour)


@dataclass(frozen=True)
class PlanMsg:
    plan_id: int
    situation_id: int
    certainty: float
    tasks: tuple[Action, ...]
    day: int
    hour: int

    def __post_init__(self) -> None:
        _validate_clock(self.day, self.hour)


@dataclass(frozen=True)
class TaskAssignment:
    task: Action
    tactical_agent: str
    plan_id: int
    day: int
    hour: int

    def __post_init__(self) -> None:
        _validate_clock(self.day, self.hour)


@dataclass(frozen=True)
class TaskStatus:
    task: Action
    ok: bool
    agent: str
    day: int
    hour: int

    def __post_init__(self) -> None:
        _validate_clock(self.day, self.hour)


@dataclass(frozen=True)
class PlanStatus:
    plan_id: int
    ok: bool
    day: int
    hour: int

    def __post_init__(self) -> None:
        _validate_clock(self.day, self.hour)


Message = (SituationReport | AggregatedReport | PlanMsg | TaskAssignment
           | TaskStatus | PlanStatus)


@dataclass(frozen=True)
class LogEntry:
    """One crisis-response log line: who did what, when, with which details."""

    agent: str
    eoc: str
    description: str
    day: int
    hour: int
    details: str

    def render(self) -> str:
        return (
            f"{self.agent} | {self.eoc} | {self.description} | "
            f"Days:[{self.day:03d}] -- Hours:[{self.hour:02d}] | {self.details}"
        )


_LINE_RE = re.compile(
    r"^(?P<agent>[^|]+) \| (?P<eoc>[^|]+) \| (?P<description>[^|]+) \| "
    r"Days:\[(?P<day>\d+)\] -- Hours:\[(?P<hour>\d+)\] \| (?P<details>.*)$"
)


def parse_log_line(line: str) -> LogEntry:
    match = _LINE_RE.match(line.rstrip("\n"))
    if match is None:
        raise ValueError(f"unparseable log line: {line!r}")
    return LogEntry(
        agent=match["agent"].strip(),
        eoc=match["eoc"].strip(),
        description=match["description"].strip(),
        day=int(match["day"]),
        hour=int(match["hour"]),
        details=match["details"].strip(),
    )


def _detail(details: str, key: str) -> str | None:
    match = re.search(rf"{re.escape(key)}: ([^-|]+?)(?: -|$)", details)
    return match.group(1).strip() if match else None


def events_for_entry(entry: LogEntry, state: ControlLoopState) -> list[ControlEvent]:
    """Control-loop events a log line encodes, given the replay state."""
    desc = entry.description
    if desc == DESC_AGGREGATE:
        if state is not ControlLoopState.MONITORING:
            return []
        nonself = _detail(entry.details, "Non-self") == "true"
        return [ControlEvent.NONSELF_DETECTED if nonself else ControlEvent.NO_CHANGE]
    if desc == DESC_DISTRIBUTE:
        memory = _detail(entry.details, "Memory") or ""
        if memory.startswith("hit"):
            return [ControlEvent.MEMORY_MATCH, ControlEvent.PLAN_FOUND]
        if memory.startswith("miss"):
            return [
                ControlEvent.MEMORY_MISS,
                ControlEvent.NONSELF_DETECTED,
                ControlEvent.NONSELF_DETECTED,
                ControlEvent.PLAN_FOUND,
            ]
        return [ControlEvent.PLAN_FOUND]  # replan: mutation restarts directly
    if desc == DESC_ALLOCATE:
        return [ControlEvent.PLAN_DEPLOYED]
    if desc == DESC_REVIEW:
        if _detail(entry.details, "Status") == "failed":
            return [ControlEvent.RESPONSE_FAILED, ControlEvent.NONSELF_DETECTED]
        return []
    if desc == DESC_STORE:
        return [ControlEvent.RESPONSE_SUCCEEDED]
    if desc == DESC_COMPLETE:
        return [ControlEvent.NO_CHANGE]
    return []


def replay_round_log(entries: Iterable[LogEntry]) -> ControlLoopState:
    """Drive the state machine with a round log; raises on any illegal step."""
    state = ControlLoopState.MONITORING
    for entry in entries:
        for event in events_for_entry(entry, state):
            state = control_step(state, event)
    return state


@dataclass
class EocRoundResult:
    summary: RoundSummary
    log: list[LogEntry]
    store: MemoryStore
    trace: EpidemicTrace
    messages: list[Message] = field(default_factory=list)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def run_eoc_round(config: ScenarioConfig, store: MemoryStore,
                  rng: np.random.Generator | None = None, *, round_index: int = 0,
                  threads: int | None = None) -> EocRoundResult:
    """Drive one EOC round; returns the summary, its log, the updated store,
    and the realized epidemic trace."""
    config.validate()
    team = config.eoc
    if rng is None:
        rng = np.random.default_rng(config.seed + SEARCH_SEED_OFFSET)
    pool = config.resolve_pool()
    policy = SelfPolicy(config.nonself_threshold)
    duration = config.duration_days

    operational = [f"Operational_{i}_{team.name}" for i in range(team.operational)]
    tacticals = [f"Tactical_{i}_{team.name}" for i in range(team.tactical)]
    comms = f"TacticalCommunication0_{team.name}"
    manager = f"CrisisManager0_{team.name}"

    world = World.initial(config.population, config.initial_infected,
                          config.disease, config.seed)
    situations = [census(world)]
    log: list[LogEntry] = []
    messages: list[Message] = []
    state = ControlLoopState.MONITORING

    report_counter = 0
    situation_counter = 0
    plan_counter = 0
    last_report_id: int | None = None

    deployed: Plan | None = None
    deployed_cost = 0.0
    detection: Situation | None = None
    pending_decision: tuple[int, int] | None = None  # (situation_id, day)
    pending_allocation: Plan | None = None
    certainty = 0.0
    reviewed = False
    baseline_trace: EpidemicTrace | None = None

    def emit(agent: str, description: str, day: int, hour: int, details: str) -> None:
        log.append(LogEntry(agent, team.name, description, day, hour, details))

    def counterfactual() -> EpidemicTrace:
        nonlocal baseline_trace
        if baseline_trace is None:
            baseline_trace = run_round(config, Plan.empty())
        return baseline_trace

    def realized_score(up_to_day: int) -> float:
        base = counterfactual().situations[: up_to_day + 1]
        real = situations[: up_to_day + 1]
        base_peak = max(s.prevalent for s in base) / config.population
        real_peak = max(s.prevalent for s in real) / config.population
        return successfulness_score(base_peak, real_peak, deployed_cost)

    def search(initial: Situation, day: int) -> Plan:
        remaining = duration - day
        plan, score = clonal_select(
            initial, pool, config.planner, config, rng,
            horizon=max(1, remaining), max_tasks=config.max_tasks, threads=threads,
        )
        return plan.shifted(day, duration) if day else plan

    def decide(day: int, situation_id: int, query: Situation, *, replan: bool) -> None:
        nonlocal state, certainty, pending_allocation, plan_counter, detection
        if replan:
            plan = search(query, day)
            memory_note = "replan"
            new_certainty = certainty
        else:
            detection = query
            retrieved = store.retrieve_nearest(query)
            if retrieved is not None and retrieved[1] <= store.match_radius:
                case, dist = retrieved
                plan = case.plan.shifted(day, duration)
                new_certainty = plan_certainty(retrieved, store.match_radius)
                memory_note = f"hit (Case Id: {case.id} - Distance: {dist})"
                state = control_step(state, ControlEvent.MEMORY_MATCH)
            else:
                plan = search(query, day)
                new_certainty = plan_certainty(None)
                memory_note = "miss"
                state = control_step(state, ControlEvent.MEMORY_MISS)
                state = control_step(state, ControlEvent.NONSELF_DETECTED)
                state = control_step(state, ControlEvent.NONSELF_DETECTED)
        plan = replace(plan, id=plan_counter, certainty=new_certainty)
        plan_counter += 1
        certainty = new_certainty
        state = control_step(state, ControlEvent.PLAN_FOUND)
        messages.append(PlanMsg(plan.id, situation_id, certainty, plan.tasks,
                                day, DECISION_HOUR))
        emit(manager, DESC_DISTRIBUTE, day, DECISION_HOUR,
             f"Plan Id: {plan.id} - Situation Id: {situation_id} - "
             f"Reference Report Id: {last_report_id} - "
             f"Plan Certainty: {_fmt(certainty)} - Memory: {memory_note} - "
             f"Tasks: {len(plan.tasks)}")
        pending_allocation = plan

    def allocate(day: int) -> None:
        nonlocal state, deployed, deployed_cost, pending_allocation
        plan = pending_allocation
        assert plan is not None
        for index, task in enumerate(plan.tasks):
            assignee = tacticals[index % len(tacticals)]
            messages.append(TaskAssignment(task, assignee, plan.id,
                                           day, ALLOCATION_HOUR))
            emit(comms, DESC_ALLOCATE, day, ALLOCATION_HOUR,
                 f"Plan Id: {plan.id} - Task: {task.action_type.value} "
                 f"[{task.from_day}-{task.to_day}] -> {assignee}")
        state = control_step(state, ControlEvent.PLAN_DEPLOYED)
        deployed = plan
        deployed_cost += plan.total_cost
        pending_allocation = None

    for day in range(duration + 1):
        if day > 0:
            active = deployed if deployed is not None else Plan.empty()
            world = step_day(world, effects_for_day(active, day - 1))
            situations.append(census(world))
        if day == duration:
            break
        for hour in range(0, 24, 2):
            if hour in REPORT_HOURS:
                snapshot = census(world)
                for agent in operational:
                    messages.append(SituationReport(report_counter, snapshot,
                                                    agent, day, hour))
                    emit(agent, DESC_REPORT, day, hour, f"Report Id: {report_counter}")
                    last_report_id = report_counter
                    report_counter += 1
            if hour in AGGREGATE_HOURS:
                snapshot = census(world)
                nonself = is_nonself(snapshot, policy)
                situation_id = situation_counter
                situation_counter += 1
                assert last_report_id is not None
                messages.append(AggregatedReport(situation_id, last_report_id,
                                                 snapshot, nonself, day, hour))
                emit(comms, DESC_AGGREGATE, day, hour,
                     f"Situation Id: {situation_id} - "
                     f"Reference Report Id: {last_report_id} - "
                     f"Non-self: {str(nonself).lower()}")
                if state is ControlLoopState.MONITORING:
                    if nonself:
                        state = control_step(state, ControlEvent.NONSELF_DETECTED)
                        pending_decision = (situation_id, day)
                    else:
                        state = control_step(state, ControlEvent.NO_CHANGE)
            if hour == DECISION_HOUR:
                if (deployed is not None and day == config.checkpoint_day
                        and not reviewed and day < duration):
                    reviewed = True
                    realized = realized_score(day)
                    ok = realized >= config.planner.acceptable_successfulness
                    emit(manager, DESC_REVIEW, day, hour,
                         f"Plan Id: {deployed.id} - Realized: {_fmt(realized)} - "
                         f"Threshold: {_fmt(config.planner.acceptable_successfulness)} - "
                         f"Status: {'ok' if ok else 'failed'}")
                    if not ok:
                        state = control_step(state, ControlEvent.RESPONSE_FAILED)
                        state = control_step(state, ControlEvent.NONSELF_DETECTED)
                        decide(day, situation_counter - 1, census(world), replan=True)
                if pending_decision is not None and pending_decision[1] <= day:
                    situation_id, _ = pending_decision
                    pending_decision = None
                    decide(day, situation_id, census(world), replan=False)
            if hour == ALLOCATION_HOUR and pending_allocation is not None:
                allocate(day)
            if hour == 18 and deployed is not None:
                for index, task in enumerate(deployed.tasks):
                    if task.to_day == day:
                        assignee = tacticals[index % len(tacticals)]
                        messages.append(TaskStatus(task, True, assignee, day, hour))
                        emit(assignee, DESC_TASK_STATUS, day, hour,
                             f"Task: {task.action_type.value} "
                             f"[{task.from_day}-{task.to_day}] - Status: ok")

    trace = EpidemicTrace(situations=situations, total_cost=deployed_cost,
                          population=config.population)
    summary = summarize(trace, round_index)
    summary.plan_certainty = certainty

    if deployed is not None:
        realized = realized_score(duration)
        messages.append(PlanStatus(deployed.id, True, duration, 2))
        emit(comms, DESC_PLAN_STATUS, duration, 2,
             f"Plan Id: {deployed.id} - Status: ok")
        assert detection is not None
        detection_day = detection.timestamp // TICKS_PER_DAY
        remembered = deployed.shifted(-detection_day, duration)
        case_id = store.store(realized, detection, remembered)
        emit(manager, DESC_STORE, duration, 2,
             f"Case Id: {case_id} - Successfulness: {_fmt(realized)} - "
             f"Plan Id: {deployed.id}")
        state = control_step(state, ControlEvent.RESPONSE_SUCCEEDED)
        emit(manager, DESC_COMPLETE, duration, 2,
             f"Round: {round_index} - Total Cost: {deployed_cost}")
        state = control_step(state, ControlEvent.NO_CHANGE)
        summary.stored_case_id = case_id
        summary.realized_successfulness = realized

    return EocRoundResult(summary=summary, log=log, store=store, trace=trace,
                          messages=messages)
