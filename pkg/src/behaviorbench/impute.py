"""Missing-value handling: session-local nearest fill, then k-NN means.

Two layers. `fill_within_session` copies the temporally nearest observed
value inside a session. `knn_impute` is the numeric core: each remaining
missing cell becomes the mean of its column over the k nearest rows.
`impute_records` chains both over BehaviorRecords.

Distance between two rows is Euclidean over z-scored columns, restricted to
dimensions observed in BOTH rows and rescaled by (total dims / shared dims);
rows sharing no observed dimension are infinitely far apart. Equidistant
neighbors are taken in row-index order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import datamodel as dm
from .errors import InsufficientNeighbors, InvalidK

DISTANCE_ID = "euclidean/zscore/shared-dims-rescaled"

DEFAULT_K = 14


@dataclass
class ColumnFill:
    missing_before: int = 0
    filled_by_session: int = 0
    filled_by_knn: int = 0


@dataclass
class ImputationReport:
    per_column: dict
    k: int
    distance: str = DISTANCE_ID

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "distance": self.distance,
            "columns": {name: vars(fill) for name, fill in
                        sorted(self.per_column.items())},
        }


def _pairwise_distances(values: np.ndarray) -> np.ndarray:
    """All-pairs masked distances for a matrix with NaN cells."""
    n, p = values.shape
    observed = ~np.isnan(values)
    mean = np.nanmean(np.where(observed, values, np.nan), axis=0)
    std = np.nanstd(np.where(observed, values, np.nan), axis=0)
    std = np.where((std == 0) | ~np.isfinite(std), 1.0, std)
    z = (values - mean) / std
    a = np.where(observed, z, 0.0)
    m = observed.astype(float)
    sq = a * a
    # sum over shared dims of (a_i - a_r)^2, written with zero-filled arrays
    d2 = (sq @ m.T) + (m @ sq.T) - 2.0 * (a @ a.T)
    shared = m @ m.T
    with np.errstate(divide="ignore", invalid="ignore"):
        d2 = np.where(shared > 0, d2 * (p / shared), np.inf)
    d2 = np.maximum(d2, 0.0)
    return np.sqrt(d2)


def knn_impute(values: np.ndarray, k: int = DEFAULT_K,
               column_names: Optional[Sequence[str]] = None):
    """Fill every NaN cell with the mean over the k nearest donor rows.

    Donors for a cell are rows with that column observed; observed cells are
    never modified. Returns (filled matrix, ImputationReport).
    """
    if k is None or int(k) != k or k <= 0:
        raise InvalidK(f"k must be a positive integer, got {k!r}")
    k = int(k)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    n, p = values.shape
    names = (tuple(column_names) if column_names is not None
             else tuple(f"col{j}" for j in range(p)))
    if len(names) != p:
        raise ValueError("column_names length must match the matrix width")

    observed = ~np.isnan(values)
    missing_cols = np.where(~observed.all(axis=0))[0]
    report = ImputationReport(
        per_column={names[j]: ColumnFill(missing_before=int((~observed[:, j]).sum()))
                    for j in missing_cols},
        k=k)
    filled = values.copy()
    if missing_cols.size == 0:
        return filled, report

    for j in missing_cols:
        donors = np.where(observed[:, j])[0]
        if donors.size < k:
            raise InsufficientNeighbors(names[j], int(donors.size), k)

    dist = _pairwise_distances(values)
    for j in missing_cols:
        donors = np.where(observed[:, j])[0]
        targets = np.where(~observed[:, j])[0]
        for i in targets:
            d = dist[i, donors]
            order = np.lexsort((donors, d))
            chosen = donors[order[:k]]
            filled[i, j] = float(np.mean(values[chosen, j]))
            report.per_column[names[j]].filled_by_knn += 1
    return filled, report


# ---------------------------------------------------------------------------
# Record-level pipeline
# ---------------------------------------------------------------------------

_FILL_COLUMNS = dm.ENV_COLUMNS + ("beacon_mac",)


def _flat_env(record: dm.BehaviorRecord) -> dict:
    flat = dm.env_values(record)
    flat["beacon_mac"] = record.env.beacon.mac if record.env.beacon else None
    return flat


def fill_within_session(records: Sequence[dm.BehaviorRecord]):
    """Copy each missing env value from the temporally nearest observed one
    in the same session; ties go to the earlier observation.

    Donor values come from the original records only (fills never cascade).
    Returns (records, per-column fill counts).
    """
    flats = [_flat_env(r) for r in records]
    times = [r.env.stamp.epoch_seconds() for r in records]
    by_session: dict = {}
    for idx, r in enumerate(records):
        by_session.setdefault(r.session_id, []).append(idx)

    fill_counts = {c: 0 for c in _FILL_COLUMNS}
    out = []
    for idx, record in enumerate(records):
        flat = dict(flats[idx])
        touched = False
        mates = by_session[record.session_id]
        for col in _FILL_COLUMNS:
            if flat[col] is not None:
                continue
            candidates = [(abs(times[m] - times[idx]), times[m], m)
                          for m in mates if m != idx and flats[m][col] is not None]
            if not candidates:
                continue
            candidates.sort()
            flat[col] = flats[candidates[0][2]][col]
            fill_counts[col] += 1
            touched = True
        if touched:
            record = replace(record, env=dm.snapshot_from_flat(flat))
        out.append(record)
    return out, fill_counts


def _snap_to_code(value: float, n_codes: int) -> int:
    """Nearest integer code; exact halfway points round down."""
    v = min(max(value, 0.0), float(n_codes - 1))
    lo = math.floor(v)
    return int(lo if (v - lo) <= 0.5 else lo + 1)


def impute_records(records: Sequence[dm.BehaviorRecord], k: int = DEFAULT_K):
    """Session fill, then k-NN means over the encoded environment block.

    Categorical columns travel as integer codes for the k-NN stage and the
    imputed code is snapped to the nearest observed category. Numeric
    integer fields (beacon RSSI) are rounded back to integers. Returns
    (complete records, ImputationReport).
    """
    if not records:
        return [], ImputationReport(per_column={}, k=k)
    filled_records, session_counts = fill_within_session(records)

    fragment = dm.encode_environment(filled_records, mode="integer")
    code_col_of = {f"{c}#code": c for c in dm.ENV_CATEGORICAL}
    source_of = {name: code_col_of.get(name, name) for name in fragment.column_names}

    matrix, knn_report = knn_impute(fragment.values, k=k,
                                    column_names=fragment.column_names)

    # Category code -> original value, per categorical column.
    filled_flats = [_flat_env(r) for r in filled_records]
    categories = {}
    for col in dm.ENV_CATEGORICAL:
        categories[col] = sorted({f[col] for f in filled_flats if f[col] is not None})

    col_index = {name: j for j, name in enumerate(fragment.column_names)}
    out = []
    for i, record in enumerate(filled_records):
        flat = dict(filled_flats[i])
        touched = False
        for name, j in col_index.items():
            source = source_of[name]
            if flat[source] is not None:
                continue
            value = matrix[i, j]
            if np.isnan(value):
                continue
            if source in dm.ENV_CATEGORICAL:
                cats = categories[source]
                flat[source] = cats[_snap_to_code(value, len(cats))]
            elif source == "beacon_rssi":
                flat[source] = int(round(value))
            else:
                flat[source] = float(value)
            touched = True
        if touched:
            record = replace(record, env=dm.snapshot_from_flat(flat))
        out.append(record)

    # beacon_mac is carried metadata, not a feature; it is session-filled but
    # never k-NN imputed, so it stays out of the accounting.
    per_column: dict = {}
    originals = [_flat_env(r) for r in records]
    for col in dm.ENV_COLUMNS:
        missing_before = sum(1 for f in originals if f[col] is None)
        if missing_before == 0:
            continue
        knn_name = f"{col}#code" if col in dm.ENV_CATEGORICAL else col
        knn_filled = (knn_report.per_column[knn_name].filled_by_knn
                      if knn_name in knn_report.per_column else 0)
        per_column[col] = ColumnFill(
            missing_before=missing_before,
            filled_by_session=session_counts[col],
            filled_by_knn=knn_filled)
    return out, ImputationReport(per_column=per_column, k=k)
