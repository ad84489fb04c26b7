"""Pandemic situation snapshots and self/non-self discrimination."""

from __future__ import annotations

from dataclasses import dataclass

STATE_FIELDS = ("s", "e", "i", "ii", "r", "im", "d")


@dataclass(frozen=True)
class Situation:
    """Census of the population over the 7 health states at one timestamp.

    Counts are absolute numbers of agents: susceptible, in-contact,
    infectious, isolated-infected, recovered, immunized, dead.
    """

    s: int = 0
    e: int = 0
    i: int = 0
    ii: int = 0
    r: int = 0
    im: int = 0
    d: int = 0
    timestamp: int = 0

    def __post_init__(self) -> None:
        for name in STATE_FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"situation count {name!r} must be >= 0")

    @property
    def total(self) -> int:
        return self.s + self.e + self.i + self.ii + self.r + self.im + self.d

    @property
    def infected(self) -> int:
        """Agents currently carrying the disease (E + I + II)."""
        return self.e + self.i + self.ii

    @property
    def prevalent(self) -> int:
        """Simultaneously infectious agents (I + II), the peak statistic."""
        return self.i + self.ii

    def counts(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in STATE_FIELDS)


@dataclass(frozen=True)
class SelfPolicy:
    """Threshold on ongoing infection at which a situation becomes non-self."""

    nonself_infection_threshold: int = 1

    def __post_init__(self) -> None:
        if self.nonself_infection_threshold < 0:
            raise ValueError("nonself_infection_threshold must be >= 0")


def distance(a: Situation, b: Situation) -> int:
    """City-block distance between two situations over the 7 state counts.

    Timestamps are not part of the metric; the populations implied by the
    two situations need not match.
    """
    return sum(abs(x - y) for x, y in zip(a.counts(), b.counts()))


def is_nonself(situation: Situation, policy: SelfPolicy = SelfPolicy()) -> bool:
    """True when ongoing infection (E + I + II) reaches the policy threshold."""
    return situation.infected >= policy.nonself_infection_threshold
