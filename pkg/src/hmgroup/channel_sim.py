"""Spot-beam receiver populations and the evaluation campaign.

Receiver SNRs degrade from the beam-center value through two attenuation
terms: a quadratic positional loss toward the beam edge and an exponentially
distributed weather loss. This parametric channel is a stand-in calibrated by
its two knobs, not a validated link budget; gain figures therefore depend on
it and only orderings and structural statistics are contractual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .matching_core import (
    Assignment,
    Receiver,
    UnschedulableReceiverError,
    build_cost_matrix,
    spectrum_efficiency,
)
from .rate_model import HierRateModel, ModcodTable
from .strategies import (
    MatchingReport,
    PerturbConfig,
    largest_diff_matching,
    quasi_optimal_matching,
    time_sharing,
)

__all__ = [
    "BeamModel",
    "GainStats",
    "SkippedTrial",
    "SimulationSummary",
    "STRATEGY_TIME_SHARING",
    "STRATEGY_LARGEST_DIFF",
    "STRATEGY_QUASI_OPTIMAL",
    "STRATEGY_UPPER_BOUND",
    "sample_receivers",
    "snr_sorted_order",
    "pair_probability_matrix",
    "run_campaign",
    "summary_to_json_dict",
    "write_pair_probability_csv",
]

STRATEGY_TIME_SHARING = "time_sharing"
STRATEGY_LARGEST_DIFF = "largest_diff"
STRATEGY_QUASI_OPTIMAL = "quasi_optimal"
STRATEGY_UPPER_BOUND = "upper_bound"


@dataclass(frozen=True)
class BeamModel:
    """Spot-beam population parameters; all SNRs are bounded by the center value."""

    snr_max_db: float = 9.0
    edge_loss_db: float = 3.0
    weather_mean_db: float = 2.0
    n_receivers: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.snr_max_db):
            raise ValueError("snr_max_db must be finite")
        if self.edge_loss_db < 0.0:
            raise ValueError("edge_loss_db must be >= 0")
        if self.weather_mean_db < 0.0:
            raise ValueError("weather_mean_db must be >= 0")
        if self.n_receivers < 1:
            raise ValueError("n_receivers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class GainStats:
    """Gain vs. time sharing over completed trials, as fractions."""

    mean: float
    min: float
    max: float


@dataclass(frozen=True)
class SkippedTrial:
    trial: int
    reason: str


@dataclass(frozen=True)
class SimulationSummary:
    n_receivers: int
    trials: int
    completed: int
    skipped: tuple[SkippedTrial, ...]
    gains: dict[str, GainStats]
    success_count: int
    failure_count: int
    pair_probability: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        matrix = np.asarray(self.pair_probability, dtype=np.float64).copy()
        matrix.setflags(write=False)
        object.__setattr__(self, "pair_probability", matrix)


def sample_receivers(model: BeamModel) -> list[Receiver]:
    """Draw one receiver population; deterministic for a fixed seed.

    Positional loss is ``edge_loss_db * u^2`` for u uniform on (0, 1), weather
    loss is exponential with the configured mean, so the expected total
    attenuation is ``edge_loss_db / 3 + weather_mean_db``.
    """
    rng = np.random.default_rng(model.seed)
    u = rng.random(model.n_receivers)
    weather = rng.exponential(scale=model.weather_mean_db, size=model.n_receivers)
    snrs = model.snr_max_db - model.edge_loss_db * u**2 - weather
    return [Receiver(index=i + 1, snr_db=float(s)) for i, s in enumerate(snrs)]


def snr_sorted_order(receivers: Sequence[Receiver]) -> list[int]:
    """Positions sorted by ascending SNR, ties by original position."""
    return sorted(range(len(receivers)), key=lambda k: (receivers[k].snr_db, k))


def pair_probability_matrix(
    samples: Iterable[tuple[Sequence[Receiver], Assignment]]
) -> np.ndarray:
    """Per-entry frequency of assignment-matrix ones, on SNR-sorted positions.

    Every trial contributes a full symmetric permutation matrix, so each row
    of the result sums to one and the matrix stays symmetric.
    """
    counts: np.ndarray | None = None
    trials = 0
    for receivers, grouping in samples:
        n = len(receivers)
        if grouping.n != n:
            raise ValueError("assignment size does not match receiver count")
        if counts is None:
            counts = np.zeros((n, n))
        elif counts.shape[0] != n:
            raise ValueError("all samples must have the same receiver count")
        rank = np.empty(n, dtype=np.intp)
        rank[np.array(snr_sorted_order(receivers))] = np.arange(n)
        for i, j in enumerate(grouping.partner):
            counts[rank[i], rank[j]] += 1.0
        trials += 1
    if counts is None:
        raise ValueError("at least one sample required")
    return counts / trials


def run_campaign(
    model: BeamModel,
    trials: int,
    cfg: PerturbConfig,
    table: ModcodTable,
    rate_model: HierRateModel,
) -> SimulationSummary:
    """Evaluate every strategy over ``trials`` independent populations.

    Trial t samples receivers with seed ``model.seed + t`` and perturbs with
    seed ``cfg.seed + t``; trials containing an unschedulable receiver are
    recorded as skipped, not silently dropped. Gains are fractions relative to
    time sharing; the pair-probability matrix accumulates the quasi-optimal
    groupings on SNR-sorted positions.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    n = model.n_receivers
    skipped: list[SkippedTrial] = []
    gain_samples: dict[str, list[float]] = {
        STRATEGY_TIME_SHARING: [],
        STRATEGY_LARGEST_DIFF: [],
        STRATEGY_QUASI_OPTIMAL: [],
        STRATEGY_UPPER_BOUND: [],
    }
    success_count = 0
    failure_count = 0
    quasi_samples: list[tuple[list[Receiver], Assignment]] = []
    for t in range(trials):
        receivers = sample_receivers(replace(model, seed=model.seed + t))
        try:
            cost = build_cost_matrix(receivers, table, rate_model)
        except UnschedulableReceiverError as exc:
            skipped.append(SkippedTrial(trial=t, reason=str(exc)))
            continue
        report: MatchingReport = quasi_optimal_matching(
            cost, replace(cfg, seed=cfg.seed + t), receivers=receivers
        )
        efficiency_ts = spectrum_efficiency(cost, time_sharing(n))
        efficiency_ld = spectrum_efficiency(cost, largest_diff_matching(receivers))
        assert report.symmetric_cost is not None and report.symmetric_assignment is not None
        efficiency_quasi = 1.0 / report.symmetric_cost
        efficiency_bound = 1.0 / report.upper_bound_cost
        gain_samples[STRATEGY_TIME_SHARING].append(0.0)
        gain_samples[STRATEGY_LARGEST_DIFF].append(efficiency_ld / efficiency_ts - 1.0)
        gain_samples[STRATEGY_QUASI_OPTIMAL].append(efficiency_quasi / efficiency_ts - 1.0)
        gain_samples[STRATEGY_UPPER_BOUND].append(efficiency_bound / efficiency_ts - 1.0)
        if report.success:
            success_count += 1
        else:
            failure_count += 1
        quasi_samples.append((receivers, report.symmetric_assignment))
    completed = len(quasi_samples)
    if completed == 0:
        raise UnschedulableReceiverError(
            f"every one of the {trials} trials contained an unschedulable receiver; "
            "raise snr_max_db or extend the MODCOD table"
        )
    gains = {
        name: GainStats(
            mean=float(np.mean(values)), min=float(np.min(values)), max=float(np.max(values))
        )
        for name, values in gain_samples.items()
    }
    return SimulationSummary(
        n_receivers=n,
        trials=trials,
        completed=completed,
        skipped=tuple(skipped),
        gains=gains,
        success_count=success_count,
        failure_count=failure_count,
        pair_probability=pair_probability_matrix(quasi_samples),
    )


def summary_to_json_dict(summary: SimulationSummary) -> dict:
    """JSON-ready dict; the pair-probability matrix is emitted as nested lists."""
    return {
        "n_receivers": summary.n_receivers,
        "trials": summary.trials,
        "completed": summary.completed,
        "skipped": [{"trial": s.trial, "reason": s.reason} for s in summary.skipped],
        "gains": {
            name: {"mean": st.mean, "min": st.min, "max": st.max}
            for name, st in summary.gains.items()
        },
        "success_count": summary.success_count,
        "failure_count": summary.failure_count,
        "pair_probability": [[float(x) for x in row] for row in summary.pair_probability],
    }


def write_pair_probability_csv(matrix: np.ndarray, dest) -> None:
    """Square CSV of the pair-probability matrix, for external heatmap plotting."""
    matrix = np.asarray(matrix)
    text = "\n".join(",".join(repr(float(x)) for x in row) for row in matrix) + "\n"
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)
