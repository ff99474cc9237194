"""Joint scatter objective: blend global/local within and between scatters
into one symmetric matrix, project onto its leading eigenvectors, and pick a
spectrally heterogeneous batch by farthest-point selection."""

import csv
from dataclasses import dataclass

import numpy as np

from .discriminant import ScatterSet, symmetric_topk


@dataclass
class TradeoffParams:
    """Blend weights, each in [0, 1]: omega balances between vs within,
    lam global vs local within, psi global vs local between."""

    omega: float = 0.5
    lam: float = 0.5
    psi: float = 0.5

    def __post_init__(self):
        for name in ("omega", "lam", "psi"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass
class ObjectiveMatrix:
    """Symmetric objective matrix plus the inputs it was built from."""

    g: np.ndarray
    scatters: ScatterSet
    params: TradeoffParams


def _check_pair(a, b, weight, name):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("scatter shapes differ")
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"{name}={weight} outside [0, 1]")
    return a, b


def combine_within(s_gw, s_lw, lam):
    """S_W = lam * s_gw + (1 - lam) * s_lw, exact at the endpoints."""
    s_gw, s_lw = _check_pair(s_gw, s_lw, lam, "lambda")
    if lam == 1.0:
        return s_gw.copy()
    if lam == 0.0:
        return s_lw.copy()
    return lam * s_gw + (1.0 - lam) * s_lw


def combine_between(s_gb, s_lb, psi):
    """S_B = psi * s_gb + (1 - psi) * s_lb, exact at the endpoints."""
    s_gb, s_lb = _check_pair(s_gb, s_lb, psi, "psi")
    if psi == 1.0:
        return s_gb.copy()
    if psi == 0.0:
        return s_lb.copy()
    return psi * s_gb + (1.0 - psi) * s_lb


def build_objective(scatters, params=None):
    """G = omega * S_B - (1 - omega) * S_W, symmetrized.

    With all weights at 0.5 this is (s_gb + s_lb - s_gw - s_lw) / 4.
    """
    params = params or TradeoffParams()
    s_w = combine_within(scatters.s_gw, scatters.s_lw, params.lam)
    s_b = combine_between(scatters.s_gb, scatters.s_lb, params.psi)
    if params.omega == 1.0:
        g = s_b
    elif params.omega == 0.0:
        g = -s_w
    else:
        g = params.omega * s_b - (1.0 - params.omega) * s_w
    g = (g + g.T) / 2.0
    return ObjectiveMatrix(g=g, scatters=scatters, params=params)


def discriminant_projection(objective, d):
    """Orthonormal basis of the objective matrix's top-d eigenvectors."""
    g = objective.g if isinstance(objective, ObjectiveMatrix) else objective
    return symmetric_topk(g, d)


def farthest_point_order(z, fuzz, pool_ids, h):
    """Greedy farthest-point pass over projected points z (one row each).

    Seeds at the highest-fuzziness point, then repeatedly adds the point
    with the largest minimum distance to the batch. Ties break toward the
    smaller pool index. Returns row positions in selection order.
    """
    z = np.asarray(z, dtype=np.float64)
    pool_ids = np.asarray(pool_ids)
    current = int(np.lexsort((pool_ids, -np.asarray(fuzz)))[0])
    chosen = [current]
    min_d2 = np.full(len(pool_ids), np.inf)

    while len(chosen) < min(h, len(pool_ids)):
        diff = z - z[current]
        min_d2 = np.minimum(min_d2, (diff * diff).sum(axis=1))
        min_d2[current] = -np.inf
        current = int(np.lexsort((pool_ids, -min_d2))[0])
        chosen.append(current)
    return chosen


def select_heterogeneous(candidates, spectra, u, h):
    """Greedy farthest-point batch in the projected candidate space.

    Candidate spectra are centered on their own mean and projected through
    u; the batch seeds at the highest-fuzziness candidate and repeatedly
    adds the candidate farthest (in min-distance to the batch) from the
    selection. All ties break toward the smaller pool index. Returns pool
    indices in selection order, at most min(h, len(candidates)).
    """
    if not candidates:
        raise ValueError("no candidates to select from")
    if h < 1:
        raise ValueError("h must be >= 1")
    spectra = np.asarray(spectra, dtype=np.float64)
    if spectra.shape[0] != len(candidates):
        raise ValueError("one spectrum per candidate required")

    z = (spectra - spectra.mean(axis=0)) @ np.asarray(u, dtype=np.float64)
    pool_ids = np.array([c.pool_index for c in candidates])
    fuzz = np.array([c.fuzziness for c in candidates])
    chosen = farthest_point_order(z, fuzz, pool_ids, h)
    return [int(pool_ids[i]) for i in chosen]


def batch_diagnostics(objective, z_selected):
    """Eigenvalue spectrum of G and the selected batch's minimum pairwise
    projected distance, for the optional per-iteration dump."""
    eigvals = np.sort(np.linalg.eigvalsh(objective.g))[::-1]
    z = np.asarray(z_selected)
    min_dist = np.inf
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            min_dist = min(min_dist, float(np.linalg.norm(z[i] - z[j])))
    return eigvals, min_dist


def write_selection_csv(path, iteration, selected, eigvals, min_dist):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "selected_indices", "min_pairwise_distance"])
        writer.writerow([iteration, " ".join(str(i) for i in selected), min_dist])
        writer.writerow([])
        writer.writerow(["rank", "eigenvalue"])
        for r, v in enumerate(eigvals):
            writer.writerow([r, v])
