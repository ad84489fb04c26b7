"""Control actions, timed plans, and the resource pool they are drawn from."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum


class InvalidPlanError(ValueError):
    """A plan violates its structural contract (e.g. a reversed interval)."""


class ActionType(Enum):
    TARGETED_SOCIAL_DISTANCING = "TARGETED_SOCIAL_DISTANCING"
    MASS_SOCIAL_DISTANCING = "MASS_SOCIAL_DISTANCING"
    TARGETED_VACCINATION = "TARGETED_VACCINATION"
    MASS_VACCINATION = "MASS_VACCINATION"
    QUARANTINING = "QUARANTINING"
    AWARENESS = "AWARENESS"


DISTANCING_TYPES = frozenset(
    {ActionType.TARGETED_SOCIAL_DISTANCING, ActionType.MASS_SOCIAL_DISTANCING}
)
VACCINATION_TYPES = frozenset(
    {ActionType.TARGETED_VACCINATION, ActionType.MASS_VACCINATION}
)

# Mass (and untargeted) actions reach the whole relevant subpopulation;
# targeted ones reach a fixed share of it.
TARGETED_COVERAGE = 0.3


def coverage(action_type: ActionType) -> float:
    if action_type in (ActionType.TARGETED_SOCIAL_DISTANCING, ActionType.TARGETED_VACCINATION):
        return TARGETED_COVERAGE
    return 1.0


def action_cost(action_type: ActionType, amount: int, from_day: int, to_day: int,
                unit_cost: float) -> float:
    """Cost of one task: per-day rate for sustained actions, one-shot for vaccine batches."""
    if action_type in VACCINATION_TYPES:
        return unit_cost * amount
    return unit_cost * amount * (to_day - from_day + 1)


@dataclass(frozen=True)
class Action:
    """One timed control strategy: what, how much, at what cost, over which days."""

    action_type: ActionType
    amount: int
    cost: float
    from_day: int
    to_day: int
    efficacy: float

    @property
    def duration(self) -> int:
        return self.to_day - self.from_day + 1

    def active_on(self, day: int) -> bool:
        return self.from_day <= day <= self.to_day

    def overlaps(self, other: "Action") -> bool:
        return self.from_day <= other.to_day and other.from_day <= self.to_day

    def shifted(self, offset: int, horizon: int) -> "Action":
        """Move the interval by `offset` days, clamped into [0, horizon]."""
        from_day = min(max(self.from_day + offset, 0), horizon)
        to_day = min(max(self.to_day + offset, from_day), horizon)
        return replace(self, from_day=from_day, to_day=to_day)


@dataclass(frozen=True)
class Plan:
    """An identified, certainty-scored collection of timed actions."""

    id: int
    certainty: float
    tasks: tuple[Action, ...] = ()

    @classmethod
    def empty(cls, plan_id: int = 0) -> "Plan":
        return cls(id=plan_id, certainty=0.0, tasks=())

    @property
    def total_cost(self) -> float:
        return sum(task.cost for task in self.tasks)

    def shifted(self, offset: int, horizon: int) -> "Plan":
        return replace(self, tasks=tuple(t.shifted(offset, horizon) for t in self.tasks))


def validate_plan(plan: Plan, horizon: int | None = None) -> None:
    """Raise InvalidPlanError if any task interval, amount, or score is out of range."""
    if not 0.0 <= plan.certainty <= 1.0:
        raise InvalidPlanError(f"plan {plan.id}: certainty {plan.certainty} outside [0, 1]")
    for task in plan.tasks:
        if task.to_day < task.from_day:
            raise InvalidPlanError(
                f"plan {plan.id}: task interval [{task.from_day}, {task.to_day}] is reversed"
            )
        if task.from_day < 0:
            raise InvalidPlanError(f"plan {plan.id}: from_day {task.from_day} is negative")
        if horizon is not None and task.to_day > horizon:
            raise InvalidPlanError(
                f"plan {plan.id}: to_day {task.to_day} exceeds horizon {horizon}"
            )
        if task.amount < 0:
            raise InvalidPlanError(f"plan {plan.id}: amount {task.amount} is negative")
        if task.cost < 0:
            raise InvalidPlanError(f"plan {plan.id}: cost {task.cost} is negative")
        if not 0.0 <= task.efficacy <= 1.0:
            raise InvalidPlanError(f"plan {plan.id}: efficacy {task.efficacy} outside [0, 1]")


@dataclass(frozen=True)
class ActionTemplate:
    """Gene-library entry: the grantable resource behind one action type."""

    action_type: ActionType
    available: int
    unit_cost: float
    efficacy: float
    max_concurrent: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.efficacy <= 1.0:
            raise InvalidPlanError(f"template {self.action_type.value}: efficacy outside [0, 1]")
        if self.available < 0 or self.unit_cost < 0 or self.max_concurrent < 1:
            raise InvalidPlanError(f"template {self.action_type.value}: negative capacity")


class ResourcePool:
    """The set of action templates a planner may compose plans from."""

    def __init__(self, templates: list[ActionTemplate] | dict[ActionType, ActionTemplate]):
        if isinstance(templates, dict):
            self.templates = dict(templates)
        else:
            self.templates = {t.action_type: t for t in templates}

    def __contains__(self, action_type: ActionType) -> bool:
        return action_type in self.templates

    def __len__(self) -> int:
        return len(self.templates)

    def action_types(self) -> list[ActionType]:
        # Enum definition order, so iteration is deterministic.
        return [t for t in ActionType if t in self.templates]

    def template(self, action_type: ActionType) -> ActionTemplate:
        return self.templates[action_type]

    @property
    def is_empty(self) -> bool:
        return not self.templates or all(t.available == 0 for t in self.templates.values())
