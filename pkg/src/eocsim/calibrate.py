"""Calibration of the transmission probability against target peak figures.

Peak prevalence of the uncontrolled epidemic grows monotonically with the
per-contact transmission probability, so a plain bisection suffices: score
the midpoint by the mean peak statistics over seeded replicate runs,
tighten the bracket toward the target prevalence, and stop once the mean
lands within tolerance (2 percentage points by default).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .config import ScenarioConfig
from .epidemic import DiseaseParams, run_round, summarize
from .plans import Plan

BRACKET_LOW = 0.001
BRACKET_HIGH = 0.95
PREVALENCE_TOLERANCE = 0.02
MAX_ITERATIONS = 25


class CalibrationError(ValueError):
    """The requested targets cannot be bracketed by the transmission range."""


@dataclass(frozen=True)
class CalibrationResult:
    params: DiseaseParams
    mean_peak_day: float
    mean_peak_prevalence: float
    iterations: int
    converged: bool


def mean_peak_stats(config: ScenarioConfig, replicates: int) -> tuple[float, float]:
    """Mean (peak_day, peak_prevalence) of uncontrolled runs over replicate seeds."""
    days = 0.0
    prevalence = 0.0
    empty = Plan.empty()
    for i in range(replicates):
        summary = summarize(run_round(config, empty, seed=config.seed + i))
        days += summary.peak_day
        prevalence += summary.peak_prevalence
    return days / replicates, prevalence / replicates


def calibrate_transmission(config: ScenarioConfig, *, target_peak_day: float = 10.0,
                           target_peak_prev: float = 0.608, replicates: int = 20,
                           tolerance: float = PREVALENCE_TOLERANCE,
                           max_iterations: int = MAX_ITERATIONS) -> CalibrationResult:
    """Bisect transmission_prob until mean peak prevalence hits the target.

    All other disease parameters stay at the configured values. Raises
    CalibrationError when the target lies outside what the bracket can
    produce (e.g. a zero prevalence target with seeded infections).
    """
    if target_peak_day <= 0 or target_peak_prev <= 0:
        raise CalibrationError("targets must be positive")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")

    def prevalence_at(prob: float) -> tuple[float, float]:
        trial = replace(config, disease=replace(config.disease, transmission_prob=prob))
        return mean_peak_stats(trial, replicates)

    low, high = BRACKET_LOW, BRACKET_HIGH
    _, prev_low = prevalence_at(low)
    _, prev_high = prevalence_at(high)
    if not prev_low <= target_peak_prev <= prev_high:
        raise CalibrationError(
            f"target peak prevalence {target_peak_prev} is unreachable: the "
            f"transmission bracket produces [{prev_low:.4f}, {prev_high:.4f}]"
        )

    mid = (low + high) / 2.0
    mean_day, mean_prev = prevalence_at(mid)
    iterations = 0
    converged = False
    for iterations in range(1, max_iterations + 1):
        mid = (low + high) / 2.0
        mean_day, mean_prev = prevalence_at(mid)
        if abs(mean_prev - target_peak_prev) <= tolerance:
            converged = True
            break
        if mean_prev < target_peak_prev:
            low = mid
        else:
            high = mid

    return CalibrationResult(
        params=replace(config.disease, transmission_prob=mid),
        mean_peak_day=mean_day,
        mean_peak_prevalence=mean_prev,
        iterations=iterations,
        converged=converged,
    )


def params_toml_block(params: DiseaseParams) -> str:
    """Render the calibrated parameter block as a TOML [disease] table."""
    return (
        "[disease]\n"
        f"contacts_per_day = {params.contacts_per_day}\n"
        f"transmission_prob = {params.transmission_prob}\n"
        f"incubation_days = {params.incubation_days}\n"
        f"infectious_days = {params.infectious_days}\n"
        f"base_isolation_prob = {params.base_isolation_prob}\n"
        f"case_fatality = {params.case_fatality}\n"
    )
