"""Symmetric grouping strategies.

The quasi-optimal heuristic re-solves Gaussian-perturbed copies of the cost
matrix until the assignment solver happens to return a self-inverse
permutation, then keeps the best grouping found; plain time sharing and
extreme-SNR pairing serve both as baselines and as fallback candidates, so a
grouping is always returned even when every perturbation attempt fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .hungarian import hungarian_solve
from .matching_core import Assignment, CostMatrix, Receiver, assignment_cost

__all__ = [
    "PerturbConfig",
    "MatchingReport",
    "perturb",
    "time_sharing",
    "largest_diff_matching",
    "largest_diff_from_costs",
    "quasi_optimal_matching",
]


@dataclass(frozen=True)
class PerturbConfig:
    """Perturbation-loop knobs: noise scale, retry budget, base RNG seed."""

    sigma: float = 1e-3
    max_retries: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.max_retries < 1:
            raise ValueError(f"max_retries must be >= 1, got {self.max_retries}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def from_json(cls, source) -> "PerturbConfig":
        """Load from JSON like {"sigma": 1e-3, "max_retries": 50, "seed": 7}."""
        if isinstance(source, (str, Path)) and Path(source).exists():
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        elif isinstance(source, str):
            data = json.loads(source)
        else:
            data = json.load(source)
        known = {"sigma", "max_retries", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown PerturbConfig fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class MatchingReport:
    """Outcome of the quasi-optimal search.

    ``upper_bound_cost`` is the unconstrained assignment optimum, which no
    grouping can undercut. ``success`` records whether a perturbation attempt
    (or the unperturbed solve itself) produced a self-inverse solution; the
    best grouping is reported either way, falling back to the baselines.
    """

    upper_bound_cost: float
    symmetric_assignment: Assignment | None
    symmetric_cost: float | None
    gap_fraction: float | None
    retries_used: int
    success: bool


def perturb(c: CostMatrix, sigma: float, seed: int) -> CostMatrix:
    """Symmetric Gaussian perturbation of a cost matrix.

    Upper-triangle entries (diagonal included) are drawn i.i.d. from
    N(0, sigma^2) and mirrored; entries pushed negative are clamped to zero so
    the result stays solvable. The input matrix is not modified.
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n = c.n
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=n * (n + 1) // 2)
    eps = np.zeros((n, n))
    iu, ju = np.triu_indices(n)
    eps[iu, ju] = noise
    eps[ju, iu] = noise
    return CostMatrix(np.maximum(c.values + eps, 0.0))


def time_sharing(n: int) -> Assignment:
    """No grouping: every receiver in its own slot (the identity matrix)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Assignment.identity(n)


def _pair_extremes(order: Sequence[int]) -> Assignment:
    # Pair the k-th entry of the given ordering with the k-th from the end;
    # for odd lengths the median entry stays single.
    n = len(order)
    partner = list(range(n))
    for k in range(n // 2):
        a, b = order[k], order[n - 1 - k]
        partner[a] = b
        partner[b] = a
    return Assignment(tuple(partner))


def largest_diff_matching(receivers: Sequence[Receiver]) -> Assignment:
    """Pair the weakest receiver with the strongest, second weakest with
    second strongest, and so on; with an odd count the median stays single.

    The returned assignment is over positions in the input list. SNR ties
    keep the original list order.
    """
    if not receivers:
        raise ValueError("at least one receiver required")
    order = sorted(range(len(receivers)), key=lambda k: (receivers[k].snr_db, k))
    return _pair_extremes(order)


def largest_diff_from_costs(c: CostMatrix) -> Assignment:
    """Extreme pairing when only the cost matrix is known.

    Diagonal entries are inverse single rates, so descending diagonal cost is
    ascending rate: the closest available stand-in for SNR order. Equal
    diagonal entries keep position order.
    """
    order = sorted(range(c.n), key=lambda k: (-c.values[k, k], k))
    return _pair_extremes(order)


def quasi_optimal_matching(
    c: CostMatrix,
    cfg: PerturbConfig,
    *,
    receivers: Sequence[Receiver] | None = None,
) -> MatchingReport:
    """Best grouping found via the perturbation heuristic plus baselines.

    Solves the unperturbed matrix first: that cost is the upper bound, and if
    the solution is already self-inverse it is optimal among groupings and
    returned immediately. Otherwise up to ``cfg.max_retries`` perturbed copies
    (seeded ``cfg.seed + attempt``) are solved until one yields a self-inverse
    permutation, which is evaluated on the original matrix. The result is the
    cheapest of that candidate and the two baselines; when ``receivers`` is
    given the extreme-SNR baseline uses true SNR order, otherwise the rate
    order implied by the diagonal.
    """
    base = hungarian_solve(c)
    if base.cost <= 0.0:
        raise ValueError(
            "optimal assignment cost is zero; scheduling costs must be positive"
        )
    if base.is_symmetric:
        grouping = base.permutation.to_assignment()
        return MatchingReport(
            upper_bound_cost=base.cost,
            symmetric_assignment=grouping,
            symmetric_cost=base.cost,
            gap_fraction=0.0,
            retries_used=0,
            success=True,
        )

    candidates: list[tuple[float, tuple[int, ...]]] = []

    def add_candidate(grouping: Assignment) -> None:
        candidates.append((assignment_cost(c, grouping), grouping.partner))

    add_candidate(time_sharing(c.n))
    if receivers is not None:
        if len(receivers) != c.n:
            raise ValueError(f"got {len(receivers)} receivers for a {c.n}x{c.n} matrix")
        add_candidate(largest_diff_matching(receivers))
    else:
        add_candidate(largest_diff_from_costs(c))

    retries_used = 0
    success = False
    for attempt in range(cfg.max_retries):
        retries_used += 1
        perturbed = perturb(c, cfg.sigma, cfg.seed + attempt)
        solution = hungarian_solve(perturbed)
        if solution.is_symmetric:
            success = True
            add_candidate(solution.permutation.to_assignment())
            break

    best_cost, best_partner = min(candidates)
    return MatchingReport(
        upper_bound_cost=base.cost,
        symmetric_assignment=Assignment(best_partner),
        symmetric_cost=best_cost,
        gap_fraction=best_cost / base.cost - 1.0,
        retries_used=retries_used,
        success=success,
    )
