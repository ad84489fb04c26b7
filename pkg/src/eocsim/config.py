"""Scenario configuration: TOML ingestion, validation, and pool resolution."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .epidemic import DiseaseParams
from .planner import SearchBudget
from .plans import ActionTemplate, ActionType, ResourcePool

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

POOL_SEED_OFFSET = 20_011
SEARCH_SEED_OFFSET = 30_011


class ConfigError(ValueError):
    """A scenario configuration failed validation; the message names the field."""


@dataclass(frozen=True)
class EocTeam:
    """Role counts and name of one emergency operations center.

    Every EOC has exactly one decision maker and one communication agent;
    the operational and tactical staffs are sized per scenario.
    """

    operational: int = 3
    tactical: int = 2
    name: str = "EOC1"

    def validate(self) -> None:
        if self.operational < 1:
            raise ConfigError(f"eoc.operational must be >= 1 (got {self.operational})")
        if self.tactical < 1:
            raise ConfigError(f"eoc.tactical must be >= 1 (got {self.tactical})")


@dataclass(frozen=True)
class MemorySettings:
    min_successfulness: float = 0.05
    match_radius: int = 30

    def validate(self) -> None:
        if not 0.0 <= self.min_successfulness <= 1.0:
            raise ConfigError("memory.min_successfulness must be within [0, 1]")
        if self.match_radius < 0:
            raise ConfigError("memory.match_radius must be >= 0")


@dataclass(frozen=True)
class RandomPoolSpec:
    """Ranges a per-round resource pool is drawn from, one template per type."""

    amount_min: int = 50
    amount_max: int = 400
    unit_cost_min: float = 0.02
    unit_cost_max: float = 0.2
    efficacy: float = 0.75
    max_concurrent: int = 2

    def validate(self) -> None:
        if not 1 <= self.amount_min <= self.amount_max:
            raise ConfigError("pool.amount_min/amount_max must satisfy 1 <= min <= max")
        if not 0.0 <= self.unit_cost_min <= self.unit_cost_max:
            raise ConfigError("pool.unit_cost_min/unit_cost_max must satisfy 0 <= min <= max")
        if not 0.0 <= self.efficacy <= 1.0:
            raise ConfigError("pool.efficacy must be within [0, 1]")
        if self.max_concurrent < 1:
            raise ConfigError("pool.max_concurrent must be >= 1")

    def draw(self, seed: int) -> ResourcePool:
        rng = np.random.default_rng(seed)
        templates = []
        for kind in ActionType:
            available = int(rng.integers(self.amount_min, self.amount_max + 1))
            unit_cost = float(rng.uniform(self.unit_cost_min, self.unit_cost_max))
            templates.append(ActionTemplate(kind, available, unit_cost,
                                            self.efficacy, self.max_concurrent))
        return ResourcePool(templates)


@dataclass
class ScenarioConfig:
    population: int = 1000
    initial_infected: int = 3
    duration_days: int = 50
    seed: int = 42
    rounds: int = 1
    disease: DiseaseParams = field(default_factory=DiseaseParams)
    pool_spec: RandomPoolSpec = field(default_factory=RandomPoolSpec)
    explicit_pool: ResourcePool | None = None
    eoc: EocTeam = field(default_factory=EocTeam)
    planner: SearchBudget = field(default_factory=SearchBudget)
    memory: MemorySettings = field(default_factory=MemorySettings)
    checkpoint_day: int = 25
    nonself_threshold: int = 1
    max_tasks: int = 10

    def validate(self) -> None:
        if self.population < 1:
            raise ConfigError(f"population must be >= 1 (got {self.population})")
        if not 0 <= self.initial_infected <= self.population:
            raise ConfigError(
                f"initial_infected must be within [0, population] (got {self.initial_infected})"
            )
        if self.duration_days < 1:
            raise ConfigError(f"duration_days must be >= 1 (got {self.duration_days})")
        if self.rounds < 1:
            raise ConfigError(f"rounds must be >= 1 (got {self.rounds})")
        if self.checkpoint_day < 0:
            raise ConfigError(f"checkpoint_day must be >= 0 (got {self.checkpoint_day})")
        if self.nonself_threshold < 0:
            raise ConfigError(f"nonself_threshold must be >= 0 (got {self.nonself_threshold})")
        if self.max_tasks < 1:
            raise ConfigError(f"max_tasks must be >= 1 (got {self.max_tasks})")
        self.eoc.validate()
        self.memory.validate()
        self.pool_spec.validate()

    def resolve_pool(self) -> ResourcePool:
        """The round's resource pool: the explicit one, or a seeded random draw."""
        if self.explicit_pool is not None:
            return self.explicit_pool
        return self.pool_spec.draw(self.seed + POOL_SEED_OFFSET)

    def for_round(self, round_index: int) -> "ScenarioConfig":
        """Per-round view: round k runs on seed base_seed + k."""
        return replace(self, seed=self.seed + round_index)


def _take(section: dict, table: str, known: dict) -> dict:
    unknown = set(section) - set(known)
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"unknown key {name!r} in [{table}]")
    coerced = {}
    for key, value in section.items():
        kind = known[key]
        try:
            coerced[key] = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{table}.{key}: {exc}") from exc
    return coerced


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario TOML file."""
    with open(path, "rb") as handle:
        try:
            raw = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    known_tables = {"scenario", "disease", "pool", "eoc", "planner", "memory"}
    unknown_tables = set(raw) - known_tables
    if unknown_tables:
        raise ConfigError(f"unknown table [{sorted(unknown_tables)[0]}]")

    scenario = _take(raw.get("scenario", {}), "scenario", {
        "population": int, "initial_infected": int, "duration_days": int,
        "seed": int, "rounds": int, "checkpoint_day": int,
        "nonself_threshold": int, "max_tasks": int,
    })
    disease_kw = _take(raw.get("disease", {}), "disease", {
        "contacts_per_day": float, "transmission_prob": float,
        "incubation_days": int, "infectious_days": int,
        "base_isolation_prob": float, "case_fatality": float,
    })
    pool_section = dict(raw.get("pool", {}))
    template_rows = pool_section.pop("templates", None)
    pool_kw = _take(pool_section, "pool", {
        "amount_min": int, "amount_max": int, "unit_cost_min": float,
        "unit_cost_max": float, "efficacy": float, "max_concurrent": int,
    })
    explicit_pool = None
    if template_rows is not None:
        if pool_kw:
            raise ConfigError(
                "pool.templates cannot be combined with random-pool keys "
                f"({sorted(pool_kw)[0]})"
            )
        explicit_pool = _explicit_pool(template_rows)
    eoc_kw = _take(raw.get("eoc", {}), "eoc", {
        "operational": int, "tactical": int, "name": str,
    })
    planner_kw = _take(raw.get("planner", {}), "planner", {
        "generations": int, "population_size": int, "clones_per_elite": int,
        "acceptable_successfulness": float,
    })
    memory_kw = _take(raw.get("memory", {}), "memory", {
        "min_successfulness": float, "match_radius": int,
    })

    try:
        disease = DiseaseParams(**disease_kw)
    except ValueError as exc:
        raise ConfigError(f"disease: {exc}") from exc
    try:
        planner = SearchBudget(**planner_kw)
    except ValueError as exc:
        raise ConfigError(f"planner: {exc}") from exc

    config = ScenarioConfig(
        disease=disease,
        pool_spec=RandomPoolSpec(**pool_kw),
        explicit_pool=explicit_pool,
        eoc=EocTeam(**eoc_kw),
        planner=planner,
        memory=MemorySettings(**memory_kw),
        **scenario,
    )
    config.validate()
    return config


def _explicit_pool(rows: object) -> ResourcePool:
    """Build a fixed resource pool from [[pool.templates]] rows."""
    if not isinstance(rows, list) or not rows:
        raise ConfigError("pool.templates must be a non-empty array of tables")
    templates = []
    seen: set[ActionType] = set()
    for index, row in enumerate(rows):
        known = {"action_type": str, "available": int, "unit_cost": float,
                 "efficacy": float, "max_concurrent": int}
        fields = _take(dict(row), f"pool.templates[{index}]", known)
        try:
            kind = ActionType(fields.pop("action_type"))
        except (KeyError, ValueError):
            raise ConfigError(
                f"pool.templates[{index}].action_type must be one of "
                f"{[t.value for t in ActionType]}"
            ) from None
        if kind in seen:
            raise ConfigError(f"pool.templates: duplicate action_type {kind.value}")
        seen.add(kind)
        try:
            templates.append(ActionTemplate(kind, **fields))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"pool.templates[{index}]: {exc}") from exc
    return ResourcePool(templates)
