"""Groupings as involutions, cost matrices, and the exact brute-force oracles.

A grouping of n receivers into singles and pairs is a self-inverse
permutation (involution), i.e. a symmetric permutation matrix. Its cost on
the inverse-rate cost matrix is the reciprocal of the average spectrum
efficiency the grouping offers to every receiver.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .rate_model import HierRateModel, ModcodTable, pair_rate_matrix, single_rate

__all__ = [
    "Receiver",
    "Assignment",
    "PermutationAssignment",
    "CostMatrix",
    "UnschedulableReceiverError",
    "build_cost_matrix",
    "assignment_cost",
    "spectrum_efficiency",
    "count_strategies",
    "enumerate_involutions",
    "brute_force_optimal_symmetric",
    "brute_force_optimal_permutation",
    "load_cost_csv",
    "dump_cost_csv",
    "assignment_to_json",
    "assignment_from_json",
]

DEFAULT_ENUMERATION_CAP = 12
PERMUTATION_BRUTE_FORCE_CAP = 9


class UnschedulableReceiverError(ValueError):
    """A receiver (or pair) has rate 0 and can never be served."""


@dataclass(frozen=True)
class Receiver:
    """A terminal, identified by a user-facing label, with its downlink SNR."""

    index: int
    snr_db: float

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db):
            raise ValueError(f"receiver {self.index}: snr_db must not be NaN")


@dataclass(frozen=True)
class Assignment:
    """A grouping: ``partner[i] == i`` is a single, otherwise i pairs with partner[i].

    The partner array must be an involution (self-inverse permutation), which
    is exactly the condition for the corresponding 0/1 matrix to be a
    symmetric permutation matrix.
    """

    partner: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.partner)
        if n == 0:
            raise ValueError("assignment must cover at least one receiver")
        for i, j in enumerate(self.partner):
            if not 0 <= j < n:
                raise ValueError(f"partner[{i}] = {j} out of range")
            if self.partner[j] != i:
                raise ValueError(
                    f"not an involution: partner[{i}] = {j} but partner[{j}] = {self.partner[j]}"
                )

    @classmethod
    def identity(cls, n: int) -> "Assignment":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.partner)

    def pairs(self) -> list[tuple[int, int]]:
        """Matched pairs as (i, j) with i < j."""
        return [(i, j) for i, j in enumerate(self.partner) if i < j]

    def singles(self) -> list[int]:
        return [i for i, j in enumerate(self.partner) if i == j]

    def to_matrix(self) -> np.ndarray:
        """Dense symmetric permutation matrix (for statistics output)."""
        x = np.zeros((self.n, self.n))
        x[np.arange(self.n), np.array(self.partner)] = 1.0
        return x


@dataclass(frozen=True)
class PermutationAssignment:
    """An arbitrary (not necessarily self-inverse) permutation of {0..n-1}."""

    sigma: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.sigma)
        if n == 0:
            raise ValueError("permutation must cover at least one receiver")
        if sorted(self.sigma) != list(range(n)):
            raise ValueError("sigma is not a permutation")

    @property
    def n(self) -> int:
        return len(self.sigma)

    @property
    def is_involution(self) -> bool:
        return all(self.sigma[j] == i for i, j in enumerate(self.sigma))

    def to_assignment(self) -> Assignment:
        if not self.is_involution:
            raise ValueError("permutation is not self-inverse")
        return Assignment(self.sigma)


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Symmetric matrix of scheduling costs in symbol-time-per-bit units."""

    values: np.ndarray
    n: int = field(init=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"cost matrix must be square, got shape {values.shape}")
        if values.shape[0] == 0:
            raise ValueError("cost matrix must be at least 1x1")
        if not np.isfinite(values).all():
            raise ValueError("cost matrix entries must be finite")
        if (values < 0.0).any():
            raise ValueError("cost matrix entries must be non-negative")
        if not np.array_equal(values, values.T):
            raise ValueError("cost matrix must be symmetric")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n", values.shape[0])


def build_cost_matrix(
    receivers: Sequence[Receiver], table: ModcodTable, model: HierRateModel
) -> CostMatrix:
    """Cost matrix for a receiver population.

    Diagonal entries are 1/R_i (inverse single rate); entry (i, j) for i != j
    is 1/(2 R_ij) where R_ij is the pair rate, so a matched pair contributes
    its two mirrored entries, i.e. exactly one inverse pair rate.
    """
    if not receivers:
        raise ValueError("at least one receiver required")
    n = len(receivers)
    diag = np.empty(n)
    for pos, receiver in enumerate(receivers):
        rate = single_rate(receiver.snr_db, table)
        if rate <= 0.0:
            raise UnschedulableReceiverError(
                f"receiver {receiver.index} (SNR {receiver.snr_db} dB) is below "
                "every MODCOD threshold and cannot be scheduled"
            )
        diag[pos] = 1.0 / rate
    snrs = np.array([r.snr_db for r in receivers])
    if not np.isfinite(snrs).all():
        bad = receivers[int(np.flatnonzero(~np.isfinite(snrs))[0])]
        raise UnschedulableReceiverError(
            f"receiver {bad.index} has non-finite SNR {bad.snr_db} dB and cannot be paired"
        )
    values = np.zeros((n, n))
    np.fill_diagonal(values, diag)
    if n > 1:
        rates = pair_rate_matrix(snrs, model)
        iu, ju = np.triu_indices(n, k=1)
        pair_rates = rates[iu, ju]
        if (pair_rates <= 0.0).any() or not np.isfinite(pair_rates).all():
            k = int(np.flatnonzero((pair_rates <= 0.0) | ~np.isfinite(pair_rates))[0])
            i, j = receivers[int(iu[k])], receivers[int(ju[k])]
            raise UnschedulableReceiverError(
                f"pair (receiver {i.index}, receiver {j.index}) has non-positive rate"
            )
        off = 1.0 / (2.0 * pair_rates)
        values[iu, ju] = off
        values[ju, iu] = off
    return CostMatrix(values)


def _partner_array(x: Assignment | PermutationAssignment) -> tuple[int, ...]:
    if isinstance(x, Assignment):
        return x.partner
    if isinstance(x, PermutationAssignment):
        return x.sigma
    raise TypeError(f"expected Assignment or PermutationAssignment, got {type(x)!r}")


def assignment_cost(c: CostMatrix, x: Assignment | PermutationAssignment) -> float:
    """Sum of the n selected matrix entries, one per row and column."""
    targets = _partner_array(x)
    if len(targets) != c.n:
        raise ValueError(f"assignment covers {len(targets)} receivers, matrix has {c.n}")
    return float(c.values[np.arange(c.n), np.array(targets)].sum())


def spectrum_efficiency(c: CostMatrix, x: Assignment) -> float:
    """Average spectrum efficiency offered to every receiver by grouping ``x``.

    The reciprocal of the assignment cost: each pair contributes one inverse
    pair rate (two mirrored half entries) and each single one inverse rate.
    """
    if not isinstance(x, Assignment):
        raise TypeError("spectrum efficiency is defined for involutions only")
    return 1.0 / assignment_cost(c, x)


def count_strategies(n: int) -> int:
    """Number of groupings of n receivers into singles and pairs.

    Follows the recursion obtained by deciding the fate of the last receiver:
    it stays single, or pairs with one of the n-1 others. Exact integer
    arithmetic; the counts grow super-exponentially.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    prev, cur = 1, 1  # counts for 0 and 1 receivers
    for k in range(2, n + 1):
        prev, cur = cur, cur + (k - 1) * prev
    return cur


def _involutions(slots: list[int], partner: list[int]) -> Iterator[tuple[int, ...]]:
    # Decide the largest unassigned slot first: single, then paired with each
    # smaller slot in ascending order.
    if not slots:
        yield tuple(partner)
        return
    k = slots[-1]
    rest = slots[:-1]
    partner[k] = k
    yield from _involutions(rest, partner)
    for pos, j in enumerate(rest):
        partner[k] = j
        partner[j] = k
        yield from _involutions(rest[:pos] + rest[pos + 1 :], partner)
        partner[j] = j


def enumerate_involutions(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Assignment]:
    """Stream every grouping of n receivers exactly once.

    Refuses n above ``cap`` (default 12): the number of involutions grows
    super-exponentially, so raise the cap explicitly if you really mean it.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > cap:
        raise ValueError(
            f"enumerating involutions for n = {n} exceeds the cap of {cap} "
            f"({count_strategies(n)} assignments); pass cap={n} to allow it"
        )

    def generate() -> Iterator[Assignment]:
        for partner in _involutions(list(range(n)), list(range(n))):
            yield Assignment(partner)

    return generate()


def brute_force_optimal_symmetric(
    c: CostMatrix, cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[Assignment, float]:
    """Exact minimum-cost grouping by exhaustive scan of all involutions.

    Ties are broken toward the lexicographically smallest partner array.
    """
    if c.n > cap:
        raise ValueError(
            f"enumerating involutions for n = {c.n} exceeds the cap of {cap} "
            f"({count_strategies(c.n)} assignments); pass cap={c.n} to allow it"
        )
    values = c.values
    rows = np.arange(c.n)
    best_partner: tuple[int, ...] | None = None
    best_cost = math.inf
    for partner in _involutions(list(range(c.n)), list(range(c.n))):
        cost = float(values[rows, np.array(partner)].sum())
        if cost < best_cost or (cost == best_cost and partner < best_partner):
            best_cost = cost
            best_partner = partner
    assert best_partner is not None
    return Assignment(best_partner), best_cost


def brute_force_optimal_permutation(c: CostMatrix) -> tuple[PermutationAssignment, float]:
    """Exact minimum assignment cost over all n! permutations.

    Test oracle for the polynomial solver; refuses n > 9. Ties are broken
    toward the lexicographically smallest permutation.
    """
    n = c.n
    if n > PERMUTATION_BRUTE_FORCE_CAP:
        raise ValueError(
            f"permutation brute force is capped at n = {PERMUTATION_BRUTE_FORCE_CAP}, got {n}"
        )
    perms = np.array(list(permutations(range(n))), dtype=np.intp)
    costs = c.values[np.arange(n)[None, :], perms].sum(axis=1)
    best = int(np.argmin(costs))  # first minimum = lexicographically smallest
    return PermutationAssignment(tuple(int(j) for j in perms[best])), float(costs[best])


def load_cost_csv(source) -> CostMatrix:
    """Read a square cost matrix from CSV (one row per line, no header)."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    else:
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        rows = list(csv.reader(data.splitlines()))
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError("cost CSV is empty")
    n = len(rows)
    values = np.empty((n, n))
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValueError(f"row {i + 1}: expected {n} entries, got {len(row)}")
        try:
            values[i] = [float(cell) for cell in row]
        except ValueError as exc:
            raise ValueError(f"row {i + 1}: {exc}") from None
    return CostMatrix(values)


def dump_cost_csv(c: CostMatrix, dest) -> None:
    """Write a cost matrix as square CSV (repr floats, round-trip safe)."""
    text = "\n".join(",".join(repr(float(v)) for v in row) for row in c.values) + "\n"
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)


def assignment_to_json(x: Assignment) -> str:
    """Serialize with 1-based indices, matching all user-facing output."""
    return json.dumps({"partner": [j + 1 for j in x.partner]})


def assignment_from_json(text: str) -> Assignment:
    data = json.loads(text)
    partner = data["partner"]
    return Assignment(tuple(int(j) - 1 for j in partner))
