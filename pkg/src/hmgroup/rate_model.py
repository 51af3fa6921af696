"""SNR-to-rate models.

Maps receiver SNRs to achievable spectral efficiencies, both for a single
receiver served with its best MODCOD and for a pair of receivers sharing one
transmission through two-layer superposition.
"""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import IO, Mapping

import numpy as np

__all__ = [
    "ModcodEntry",
    "ModcodTable",
    "ModcodParseError",
    "PairRateKind",
    "HierRateModel",
    "single_rate",
    "hier_rate",
    "pair_rate_matrix",
    "load_modcod_table",
    "load_pair_rate_table",
    "default_modcod_table",
]

# Modulations supported by the bundled table family (QPSK through 32-APSK).
ALLOWED_BITS_PER_SYMBOL = (2, 3, 4, 5)

_MODCOD_HEADER = ["modulation", "bits_per_symbol", "code_rate", "snr_threshold_db"]
_PAIR_TABLE_HEADER = ["snr_i_db", "snr_j_db", "rate_bits_per_symbol"]


class ModcodParseError(ValueError):
    """A MODCOD or pair-rate CSV could not be parsed.

    ``row`` is the 1-based data row number when the failure is row-specific.
    """

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class ModcodEntry:
    """One (modulation, code rate) operating point with its usability threshold."""

    modulation_name: str
    bits_per_symbol: int
    code_rate: float
    snr_threshold_db: float

    def __post_init__(self) -> None:
        if self.bits_per_symbol not in ALLOWED_BITS_PER_SYMBOL:
            raise ValueError(
                f"bits_per_symbol must be one of {ALLOWED_BITS_PER_SYMBOL}, "
                f"got {self.bits_per_symbol}"
            )
        if not 0.0 < self.code_rate <= 1.0:
            raise ValueError(f"code_rate must be in (0, 1], got {self.code_rate}")
        if not math.isfinite(self.snr_threshold_db):
            raise ValueError("snr_threshold_db must be finite")

    @property
    def spectral_efficiency(self) -> float:
        """Delivered bits per channel symbol when this entry is selected."""
        return self.bits_per_symbol * self.code_rate


@dataclass(frozen=True)
class ModcodTable:
    """Cleaned MODCOD entries, sorted by threshold.

    Construction requires entries already cleaned: thresholds strictly
    increasing and efficiencies non-decreasing. ``load_modcod_table`` performs
    the cleaning (sort, dedup, dominated-row removal).
    """

    entries: tuple[ModcodEntry, ...]
    _thresholds: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("ModcodTable must contain at least one entry")
        thresholds = tuple(e.snr_threshold_db for e in self.entries)
        for a, b in zip(thresholds, thresholds[1:]):
            if not a < b:
                raise ValueError("thresholds must be strictly increasing")
        effs = [e.spectral_efficiency for e in self.entries]
        for a, b in zip(effs, effs[1:]):
            if b < a:
                raise ValueError("spectral efficiency must be non-decreasing in threshold")
        object.__setattr__(self, "_thresholds", thresholds)

    def __len__(self) -> int:
        return len(self.entries)

    def best_entry(self, snr_db: float) -> ModcodEntry | None:
        """Highest-efficiency entry usable at ``snr_db``, or None if none qualifies."""
        if math.isnan(snr_db):
            raise ValueError("snr_db must not be NaN")
        pos = bisect_right(self._thresholds, snr_db)
        if pos == 0:
            return None
        return self.entries[pos - 1]


def single_rate(snr_db: float, table: ModcodTable) -> float:
    """Best single-receiver spectral efficiency at ``snr_db``.

    Returns 0.0 when the SNR is below every threshold; callers decide whether
    an unreachable receiver is fatal.
    """
    entry = table.best_entry(snr_db)
    return 0.0 if entry is None else entry.spectral_efficiency


class PairRateKind(Enum):
    SUPERPOSITION_CAPACITY = "superposition_capacity"
    TABLE_DRIVEN = "table_driven"


@dataclass(frozen=True)
class HierRateModel:
    """How the shared rate of a receiver pair is computed.

    The default computes the balanced two-layer superposition rate: split unit
    transmit power between a base layer decoded by the weaker receiver
    (treating the refinement layer as noise) and a refinement layer decoded by
    the stronger receiver after cancelling the base layer, then pick the split
    where both layers carry the same rate. ``TABLE_DRIVEN`` instead looks the
    pair rate up from externally supplied values keyed by the SNR pair.
    """

    kind: PairRateKind = PairRateKind.SUPERPOSITION_CAPACITY
    alpha_grid_tolerance: float = 1e-9
    pair_table: Mapping[tuple[float, float], float] | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_grid_tolerance:
            raise ValueError("alpha_grid_tolerance must be positive")
        if self.kind is PairRateKind.TABLE_DRIVEN and self.pair_table is None:
            raise ValueError("table_driven model requires a pair_table")


def _db_to_linear(snr_db):
    return 10.0 ** (np.asarray(snr_db, dtype=np.float64) / 10.0)


def _balanced_superposition_rate(
    s_weak: np.ndarray, s_strong: np.ndarray, tolerance: float
) -> np.ndarray:
    """Balanced two-layer rate for linear-SNR arrays (elementwise).

    The base-layer rate increases with the base-layer power fraction while the
    refinement-layer rate decreases, so the max-min split is at their crossing;
    bisect the power fraction until the bracket is narrower than ``tolerance``.
    """
    lo = np.zeros_like(s_weak)
    hi = np.ones_like(s_weak)
    steps = max(1, math.ceil(math.log2(1.0 / tolerance)))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        base = np.log2(1.0 + mid * s_weak / ((1.0 - mid) * s_weak + 1.0))
        refinement = np.log2(1.0 + (1.0 - mid) * s_strong)
        base_ahead = base >= refinement
        hi = np.where(base_ahead, mid, hi)
        lo = np.where(base_ahead, lo, mid)
    mid = 0.5 * (lo + hi)
    base = np.log2(1.0 + mid * s_weak / ((1.0 - mid) * s_weak + 1.0))
    refinement = np.log2(1.0 + (1.0 - mid) * s_strong)
    return np.minimum(base, refinement)


def hier_rate(snr_i_db: float, snr_j_db: float, model: HierRateModel) -> float:
    """Shared spectral efficiency of a hierarchically modulated pair.

    Symmetric in its SNR arguments; both are required to be finite.
    """
    if not (math.isfinite(snr_i_db) and math.isfinite(snr_j_db)):
        raise ValueError(
            f"pair SNRs must be finite, got ({snr_i_db}, {snr_j_db})"
        )
    weak_db, strong_db = sorted((snr_i_db, snr_j_db))
    if model.kind is PairRateKind.TABLE_DRIVEN:
        assert model.pair_table is not None
        try:
            rate = model.pair_table[(weak_db, strong_db)]
        except KeyError:
            raise ValueError(
                f"pair table has no rate for SNR pair ({weak_db}, {strong_db})"
            ) from None
        return float(rate)
    out = _balanced_superposition_rate(
        _db_to_linear(np.array([weak_db])),
        _db_to_linear(np.array([strong_db])),
        model.alpha_grid_tolerance,
    )
    return float(out[0])


def pair_rate_matrix(snrs_db: np.ndarray, model: HierRateModel) -> np.ndarray:
    """Symmetric n x n matrix of pair rates for every receiver pair.

    The diagonal is left at 0 (a receiver is never paired with itself).
    """
    snrs = np.asarray(snrs_db, dtype=np.float64)
    if snrs.ndim != 1:
        raise ValueError("snrs_db must be one-dimensional")
    if not np.isfinite(snrs).all():
        raise ValueError("pair SNRs must be finite")
    n = snrs.shape[0]
    out = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    if iu.size == 0:
        return out
    if model.kind is PairRateKind.TABLE_DRIVEN:
        rates = np.array(
            [hier_rate(snrs[i], snrs[j], model) for i, j in zip(iu, ju)]
        )
    else:
        s = _db_to_linear(snrs)
        rates = _balanced_superposition_rate(
            np.minimum(s[iu], s[ju]),
            np.maximum(s[iu], s[ju]),
            model.alpha_grid_tolerance,
        )
    out[iu, ju] = rates
    out[ju, iu] = rates
    return out


def _parse_code_rate(text: str) -> float:
    text = text.strip()
    if "/" in text:
        frac = Fraction(text)
        return frac.numerator / frac.denominator
    return float(text)


def _open_source(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError(f"unsupported source type: {type(source)!r}")


def load_modcod_table(source) -> ModcodTable:
    """Parse, validate and clean a MODCOD CSV.

    Expected header: ``modulation,bits_per_symbol,code_rate,snr_threshold_db``.
    Code rates are accepted as ``p/q`` or decimal. Rows are sorted by
    threshold; duplicate operating points are rejected, rows made redundant by
    a cheaper-or-equal threshold with at least the same efficiency are dropped.
    """
    with _open_source(source) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ModcodParseError("empty MODCOD file") from None
        if [h.strip() for h in header] != _MODCOD_HEADER:
            raise ModcodParseError(
                f"expected header {','.join(_MODCOD_HEADER)!r}, got {','.join(header)!r}"
            )
        entries: list[ModcodEntry] = []
        seen: set[tuple[str, float]] = set()
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 4:
                raise ModcodParseError(f"expected 4 fields, got {len(row)}", row=row_no)
            name = row[0].strip()
            try:
                bits = int(row[1])
                rate = _parse_code_rate(row[2])
                threshold = float(row[3])
                entry = ModcodEntry(name, bits, rate, threshold)
            except (ValueError, ZeroDivisionError) as exc:
                raise ModcodParseError(str(exc), row=row_no) from None
            key = (name, rate)
            if key in seen:
                raise ModcodParseError(
                    f"duplicate (modulation, code_rate) = ({name}, {row[2].strip()})",
                    row=row_no,
                )
            seen.add(key)
            entries.append(entry)
    if not entries:
        raise ModcodParseError("MODCOD file contains no data rows")
    # remove dominated rows: scan by ascending threshold (best efficiency
    # first among equal thresholds) and keep only strict efficiency gains
    entries.sort(key=lambda e: (e.snr_threshold_db, -e.spectral_efficiency))
    cleaned: list[ModcodEntry] = []
    best_eff = 0.0
    for entry in entries:
        if entry.spectral_efficiency > best_eff:
            cleaned.append(entry)
            best_eff = entry.spectral_efficiency
    return ModcodTable(tuple(cleaned))


def load_pair_rate_table(source) -> dict[tuple[float, float], float]:
    """Parse a pair-rate CSV into the lookup used by table-driven models.

    Expected header: ``snr_i_db,snr_j_db,rate_bits_per_symbol``. Keys are
    stored with the SNR pair sorted, so lookups are order-insensitive; rates
    must be strictly positive.
    """
    with _open_source(source) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ModcodParseError("empty pair-rate file") from None
        if [h.strip() for h in header] != _PAIR_TABLE_HEADER:
            raise ModcodParseError(
                f"expected header {','.join(_PAIR_TABLE_HEADER)!r}, got {','.join(header)!r}"
            )
        table: dict[tuple[float, float], float] = {}
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ModcodParseError(f"expected 3 fields, got {len(row)}", row=row_no)
            try:
                snr_i, snr_j, rate = (float(cell) for cell in row)
            except ValueError as exc:
                raise ModcodParseError(str(exc), row=row_no) from None
            if not (math.isfinite(snr_i) and math.isfinite(snr_j)):
                raise ModcodParseError("pair SNRs must be finite", row=row_no)
            if not rate > 0.0:
                raise ModcodParseError(f"pair rate must be positive, got {rate}", row=row_no)
            key = (min(snr_i, snr_j), max(snr_i, snr_j))
            if key in table:
                raise ModcodParseError(f"duplicate SNR pair {key}", row=row_no)
            table[key] = rate
    if not table:
        raise ModcodParseError("pair-rate file contains no data rows")
    return table


@lru_cache(maxsize=1)
def default_modcod_table() -> ModcodTable:
    """The bundled table: QPSK through 32-APSK at the eleven standard code rates.

    Thresholds are synthetic: each operating point is assumed usable where
    AWGN capacity reaches 1.25x its spectral efficiency. Replace with measured
    thresholds via ``load_modcod_table`` for any real link analysis.
    """
    data = resources.files("hmgroup.data").joinpath("default_modcod.csv").read_bytes()
    return load_modcod_table(data)
