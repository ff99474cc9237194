"""Per-sample fuzziness, the fuzziness/label association table, and the
median-based low/high grouping used to pick misclassified candidates."""

import csv
from dataclasses import dataclass

import numpy as np


@dataclass
class FuzzinessRecord:
    """One pool sample: fuzziness, raster coordinate, actual and predicted
    class, and its position in the pool ordering."""

    fuzziness: float
    coord: tuple
    actual: int
    predicted: int
    pool_index: int


@dataclass
class FuzzinessGroups:
    """Low ([0, 0.5]) and high ((0.5, 1]) fuzziness records, each sorted by
    descending fuzziness, with the per-group medians q1 and q2 (None when a
    group is empty)."""

    low: list
    high: list
    q1: float | None
    q2: float | None


def sample_fuzziness(row):
    """Membership-row fuzziness in [0, 1].

    E = -(1/C) * sum_j [mu_j log2 mu_j + (1 - mu_j) log2(1 - mu_j)], with the
    0 log 0 = 0 convention. Zero iff the row is crisp (all entries 0 or 1);
    maximal at the uniform row.
    """
    row = np.asarray(row, dtype=np.float64)
    if row.min() < 0.0 or row.max() > 1.0:
        raise ValueError("membership entries must lie in [0, 1]")

    def _xlog2(p):
        out = np.zeros_like(p)
        mask = p > 0
        out[mask] = p[mask] * np.log2(p[mask])
        return out

    e = -(_xlog2(row) + _xlog2(1.0 - row)).sum() / row.size
    return float(min(max(e, 0.0), 1.0))


def matrix_fuzziness(memberships):
    """Vector of per-row fuzziness values for an m x C membership matrix."""
    m = np.asarray(memberships, dtype=np.float64)
    if m.min() < 0.0 or m.max() > 1.0:
        raise ValueError("membership entries must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(m > 0, m * np.log2(np.where(m > 0, m, 1.0)), 0.0)
        comp = 1.0 - m
        term += np.where(comp > 0, comp * np.log2(np.where(comp > 0, comp, 1.0)), 0.0)
    return np.clip(-term.sum(axis=1) / m.shape[1], 0.0, 1.0)


def build_table(memberships, actual, coords):
    """Associate each pool sample's fuzziness with its location and labels."""
    memberships = np.asarray(memberships, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.int64)
    coords = np.asarray(coords)
    if not (len(memberships) == len(actual) == len(coords)):
        raise ValueError("memberships, labels, and coords must have equal length")
    fuzz = matrix_fuzziness(memberships)
    predicted = np.argmax(memberships, axis=1) + 1
    return [
        FuzzinessRecord(
            fuzziness=float(fuzz[i]),
            coord=(int(coords[i][0]), int(coords[i][1])),
            actual=int(actual[i]),
            predicted=int(predicted[i]),
            pool_index=i,
        )
        for i in range(len(actual))
    ]


def _median(sorted_values):
    """Median with the explicit odd (middle) / even (mean of middles) rules."""
    m = len(sorted_values)
    if m == 0:
        return None
    if m % 2 == 1:
        return float(sorted_values[(m + 1) // 2 - 1])
    return float((sorted_values[m // 2 - 1] + sorted_values[m // 2]) / 2.0)


def categorize(records):
    """Split records at fuzziness 0.5 (exactly 0.5 goes low), sort each group
    by descending fuzziness (ties by ascending pool index), and compute the
    per-group medians."""
    if not records:
        raise ValueError("no records to categorize")
    key = lambda r: (-r.fuzziness, r.pool_index)
    low = sorted((r for r in records if r.fuzziness <= 0.5), key=key)
    high = sorted((r for r in records if r.fuzziness > 0.5), key=key)
    q1 = _median(sorted(r.fuzziness for r in low))
    q2 = _median(sorted(r.fuzziness for r in high))
    return FuzzinessGroups(low=low, high=high, q1=q1, q2=q2)


def select_candidates(groups, k, high_only=False):
    """Take up to k misclassified records from each group in descending
    fuzziness order, high-group picks first. Selected candidates are the
    ones whose true labels the oracle reveals."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = []
    group_lists = [groups.high] if high_only else [groups.high, groups.low]
    for group in group_lists:
        taken = 0
        for rec in group:
            if taken >= k:
                break
            if rec.predicted != rec.actual:
                out.append(rec)
                taken += 1
    return out


def histogram_rows(records, iteration, bins=20):
    """Fuzziness histogram as (iteration, bin, count) rows for CSV export."""
    values = np.array([r.fuzziness for r in records])
    counts, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
    return [(iteration, b, int(c)) for b, c in enumerate(counts)]


def write_histogram_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "bin", "count"])
        writer.writerows(rows)
