"""Immune-inspired emergency-operations-center simulator.

A deterministic agent-based epidemic engine, a case memory of past
responses, a clonal-selection plan search, and a multi-agent EOC control
loop that ties detection, matching, planning, deployment, and retention
together.
"""

from .config import ConfigError, EocTeam, MemorySettings, RandomPoolSpec, ScenarioConfig, load_config
from .eoc import (
    AgentRole,
    AggregatedReport,
    ControlEvent,
    ControlLoopState,
    EocRoundResult,
    IllegalTransitionError,
    LogEntry,
    PlanMsg,
    PlanStatus,
    SituationReport,
    TaskAssignment,
    TaskStatus,
    control_step,
    replay_round_log,
    run_eoc_round,
    schedule,
)
from .epidemic import (
    DiseaseParams,
    EffectSet,
    EpidemicTrace,
    HealthState,
    RoundSummary,
    World,
    census,
    effects_for_day,
    run_round,
    step_day,
    summarize,
)
from .memory import MemoryCase, MemoryFormatError, MemoryStore
from .planner import (
    EmptyPoolError,
    SearchBudget,
    clonal_select,
    evaluate,
    generate_plan,
    mutate,
    plan_certainty,
)
from .plans import (
    Action,
    ActionTemplate,
    ActionType,
    InvalidPlanError,
    Plan,
    ResourcePool,
)
from .situation import SelfPolicy, Situation, distance, is_nonself

__version__ = "0.1.0"
