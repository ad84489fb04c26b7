"""Persistent case memory with nearest-situation retrieval.

Every finished response round leaves one case behind: the situation that
triggered it, the plan that handled it, and how well that went. Retrieval
is a linear city-block scan that skips cases below the deliberation
threshold; low scorers are kept on disk for the audit trail but never
returned.

File format: one JSON object per line, e.g.

    {"id": 0, "successfulness": 0.12, "situation": {"s": 997, "e": 0,
     "i": 3, "ii": 0, "r": 0, "im": 0, "d": 0}, "plan": {"id": 0,
     "certainty": 0.0, "tasks": [{"action_type": "QUARANTINING",
     "amount": 120, "cost": 36.0, "from_day": 4, "to_day": 37,
     "efficacy": 0.75}]}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .plans import Action, ActionType, Plan, validate_plan
from .situation import STATE_FIELDS, Situation, distance


class MemoryFormatError(ValueError):
    """A memory file line failed to parse or validate."""


@dataclass(frozen=True)
class MemoryCase:
    id: int
    successfulness: float
    situation: Situation
    plan: Plan


def situation_to_dict(situation: Situation) -> dict:
    return {name: getattr(situation, name) for name in STATE_FIELDS}


def situation_from_dict(data: dict) -> Situation:
    return Situation(**{name: int(data[name]) for name in STATE_FIELDS})


def plan_to_dict(plan: Plan) -> dict:
    return {
        "id": plan.id,
        "certainty": plan.certainty,
        "tasks": [
            {
                "action_type": task.action_type.value,
                "amount": task.amount,
                "cost": task.cost,
                "from_day": task.from_day,
                "to_day": task.to_day,
                "efficacy": task.efficacy,
            }
            for task in plan.tasks
        ],
    }


def plan_from_dict(data: dict) -> Plan:
    tasks = tuple(
        Action(
            action_type=ActionType(item["action_type"]),
            amount=int(item["amount"]),
            cost=float(item["cost"]),
            from_day=int(item["from_day"]),
            to_day=int(item["to_day"]),
            efficacy=float(item["efficacy"]),
        )
        for item in data.get("tasks", [])
    )
    return Plan(id=int(data["id"]), certainty=float(data["certainty"]), tasks=tasks)


@dataclass
class MemoryStore:
    """Ordered case store; single writer, any number of readers between writes."""

    cases: list[MemoryCase] = field(default_factory=list)
    next_id: int = 0
    min_successfulness: float = 0.05
    match_radius: int = 30

    def store(self, successfulness: float, situation: Situation, plan: Plan) -> int:
        """Append a case and return its id. Low scores are stored, not erased;
        they are filtered out at retrieval time instead."""
        if not 0.0 <= successfulness <= 1.0:
            raise ValueError(f"successfulness {successfulness} outside [0, 1]")
        case_id = self.next_id
        # Memory is timeless: the clock reading is not part of the pattern.
        self.cases.append(
            MemoryCase(case_id, successfulness, replace(situation, timestamp=0), plan)
        )
        self.next_id = case_id + 1
        return case_id

    def retrieve_nearest(self, query: Situation) -> tuple[MemoryCase, int] | None:
        """Closest eligible case to `query`, or None if no case qualifies.

        Ties break on higher successfulness, then lower id.
        """
        best: tuple[int, float, int, MemoryCase] | None = None
        for case in self.cases:
            if case.successfulness < self.min_successfulness:
                continue
            key = (distance(query, case.situation), -case.successfulness, case.id)
            if best is None or key < best[:3]:
                best = (*key, case)
        if best is None:
            return None
        return best[3], best[0]

    def save(self, path: str | Path) -> None:
        lines = []
        for case in self.cases:
            lines.append(json.dumps({
                "id": case.id,
                "successfulness": case.successfulness,
                "situation": situation_to_dict(case.situation),
                "plan": plan_to_dict(case.plan),
            }, sort_keys=True))
        Path(path).write_text("".join(line + "\n" for line in lines))

    @classmethod
    def load(cls, path: str | Path, *, min_successfulness: float = 0.05,
             match_radius: int = 30) -> "MemoryStore":
        store = cls(min_successfulness=min_successfulness, match_radius=match_radius)
        max_id = -1
        with open(path) as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    case = MemoryCase(
                        id=int(record["id"]),
                        successfulness=float(record["successfulness"]),
                        situation=situation_from_dict(record["situation"]),
                        plan=plan_from_dict(record["plan"]),
                    )
                    validate_plan(case.plan)
                except (KeyError, TypeError, ValueError) as exc:
                    raise MemoryFormatError(f"{path}, line {lineno}: {exc}") from exc
                if not 0.0 <= case.successfulness <= 1.0:
                    raise MemoryFormatError(
                        f"{path}, line {lineno}: successfulness {case.successfulness} "
                        "outside [0, 1]"
                    )
                if any(c.id == case.id for c in store.cases):
                    raise MemoryFormatError(f"{path}, line {lineno}: duplicate id {case.id}")
                store.cases.append(case)
                max_id = max(max_id, case.id)
        store.next_id = max_id + 1
        return store
