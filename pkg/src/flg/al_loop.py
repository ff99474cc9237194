"""Active-learning orchestration: train, score the pool, group by fuzziness,
pick misclassified candidates, build the scatter objective, query a
heterogeneous batch, and grow the training set until the size threshold.

Also provides the random and fuzziness-only control arms and seed-averaged
curve aggregation.
"""

import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fuzziness as fz
from .classify import predict_labels, predict_memberships, train
from .data import extract_patch, initial_split
from .discriminant import rmlda_alternate, scatter_set
from .metrics import average_accuracy, confusion, kappa, overall_accuracy, prf
from .objective import (
    TradeoffParams,
    batch_diagnostics,
    build_objective,
    discriminant_projection,
    farthest_point_order,
    select_heterogeneous,
    write_selection_csv,
)

STRATEGIES = ("flg", "random", "fuzziness-only")

CSV_COLUMNS = (
    "seed", "iteration", "train_size",
    "oa", "aa", "kappa", "precision", "recall", "f1", "strategy",
)


@dataclass
class ALConfig:
    """Everything one experiment cell needs besides the cube itself."""

    classifier: str = "mlr"
    classifier_params: dict = field(default_factory=dict)
    n_initial: int = 50
    batch_size: int = 100
    candidate_cap: int | None = None
    threshold: int = 2500
    omega: float = 0.5
    lam: float = 0.5
    psi: float = 0.5
    k1: int = 5
    k2: int = 5
    proj_dim: int | None = None
    seed: int = 0
    strategy: str = "flg"
    stratified: bool = False
    high_only: bool = False
    scatter_labels: str = "actual"
    holdout: float = 0.0
    patch_window: int | None = None
    debug_dir: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.scatter_labels not in ("actual", "predicted"):
            raise ValueError("scatter_labels must be 'actual' or 'predicted'")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.cap < self.batch_size:
            raise ValueError("candidate cap must be >= batch size")
        if not 0.0 <= self.holdout < 1.0:
            raise ValueError("holdout fraction must be in [0, 1)")
        if self.patch_window is not None and (
            self.patch_window < 1 or self.patch_window % 2 == 0
        ):
            raise ValueError("patch_window must be odd and >= 1")

    @property
    def cap(self):
        return self.candidate_cap if self.candidate_cap is not None else 10 * self.batch_size


@dataclass
class IterationRecord:
    """Log line for one loop pass (iteration 0 is the initial model)."""

    iteration: int
    train_size: int
    oa: float
    aa: float
    kappa: float
    precision: float
    recall: float
    f1: float
    candidate_count: int
    selected: list
    duration_ms: float
    note: str = ""


def _sub_seed(seed, stream, iteration):
    return int(np.random.SeedSequence([seed, stream, iteration]).generate_state(1)[0])


def _fit(cube, config, split, iteration):
    X = cube.spectra(split.train_idx)
    y = cube.labels_at(split.train_idx)
    return train(
        config.classifier, X, y,
        num_classes=cube.num_classes,
        seed=_sub_seed(config.seed, 1, iteration),
        **config.classifier_params,
    )


def _evaluate(cube, model, eval_idx):
    if eval_idx.size == 0:
        return dict(oa=float("nan"), aa=float("nan"), kappa=float("nan"),
                    precision=float("nan"), recall=float("nan"), f1=float("nan"))
    predicted = predict_labels(model, cube.spectra(eval_idx))
    cm = confusion(cube.labels_at(eval_idx), predicted, num_classes=cube.num_classes)
    p, r, f1 = prf(cm)
    return dict(oa=overall_accuracy(cm), aa=average_accuracy(cm), kappa=kappa(cm),
                precision=p, recall=r, f1=f1)


def _fallback_selection(records, pool_size, h, rng):
    """No usable candidates: top-h by fuzziness, or random when all tie."""
    fuzz = np.array([r.fuzziness for r in records])
    if fuzz.max() - fuzz.min() < 1e-15:
        return rng.choice(pool_size, size=min(h, pool_size), replace=False)
    order = np.lexsort((np.arange(len(records)), -fuzz))
    return order[: min(h, pool_size)]


def _flg_selection(cube, config, model, split, iteration, dump_dir):
    pool_spectra = cube.spectra(split.pool_idx)
    memberships = predict_memberships(model, pool_spectra)
    actual = cube.labels_at(split.pool_idx)
    coords = cube.coords(split.pool_idx)
    table = fz.build_table(memberships, actual, coords)
    groups = fz.categorize(table)
    candidates = fz.select_candidates(groups, config.cap, high_only=config.high_only)

    if dump_dir is not None:
        fz.write_histogram_csv(
            dump_dir / f"fuzziness_hist_{iteration:03d}.csv",
            fz.histogram_rows(table, iteration),
        )

    h = config.batch_size
    rng = np.random.default_rng(_sub_seed(config.seed, 2, iteration))
    if not candidates:
        positions = np.asarray(_fallback_selection(table, split.pool_size, h, rng))
        return positions, 0

    positions = np.array([r.pool_index for r in candidates])
    spectra = pool_spectra[positions]
    if config.scatter_labels == "actual":
        labels = np.array([r.actual for r in candidates])
    else:
        labels = np.array([r.predicted for r in candidates])
    d = min(config.proj_dim or max(cube.num_classes - 1, 1), cube.bands)

    if config.patch_window is not None:
        selected = _patch_selection(cube, config, candidates, labels, d, h)
    else:
        scatters = scatter_set(spectra, labels, config.k1, config.k2)
        params = TradeoffParams(omega=config.omega, lam=config.lam, psi=config.psi)
        objective = build_objective(scatters, params)
        u = discriminant_projection(objective, d)
        selected = select_heterogeneous(candidates, spectra, u, h)

        if dump_dir is not None:
            z = (spectra - spectra.mean(axis=0)) @ u
            sel_rows = [np.where(positions == s)[0][0] for s in selected]
            eigvals, min_dist = batch_diagnostics(objective, z[sel_rows])
            write_selection_csv(
                dump_dir / f"selection_{iteration:03d}.csv",
                iteration, selected, eigvals, min_dist,
            )
            for name in ("s_gw", "s_gb", "s_lw", "s_lb"):
                np.savetxt(
                    dump_dir / f"{name}_{iteration:03d}.csv",
                    getattr(scatters, name), delimiter=",",
                )

    if len(selected) < min(h, split.pool_size):
        # Fewer misclassified candidates than the batch size: top up from
        # the fuzziness ranking so every iteration still adds h samples.
        ranked = _fallback_selection(table, split.pool_size, split.pool_size, rng)
        taken = set(selected)
        for pos in ranked:
            if len(selected) >= min(h, split.pool_size):
                break
            if int(pos) not in taken:
                selected.append(int(pos))
                taken.add(int(pos))
    return np.asarray(selected), len(candidates)


def _patch_selection(cube, config, candidates, labels, d, h):
    """Tensor-form variant: candidates become band x window patches, a
    two-sided trace-ratio fit replaces the vector scatters, and the batch
    spreads out in the doubly projected space."""
    w = config.patch_window
    patches = [extract_patch(cube, r.coord, w).matrix for r in candidates]
    state = rmlda_alternate(
        patches, labels,
        q_row=min(d, cube.bands), q_col=min(d, w * w),
    )
    stack = np.stack(patches)
    centered = stack - stack.mean(axis=0)
    z = np.array([(state.u_row.T @ a @ state.u_col).ravel() for a in centered])
    fuzz = [r.fuzziness for r in candidates]
    pool_ids = [r.pool_index for r in candidates]
    chosen = farthest_point_order(z, fuzz, pool_ids, h)
    return [int(pool_ids[i]) for i in chosen]


def _baseline_selection(cube, config, model, split, iteration):
    h = min(config.batch_size, split.pool_size)
    rng = np.random.default_rng(_sub_seed(config.seed, 2, iteration))
    if config.strategy == "random":
        return rng.choice(split.pool_size, size=h, replace=False), 0
    memberships = predict_memberships(model, cube.spectra(split.pool_idx))
    fuzz = fz.matrix_fuzziness(memberships)
    # Random permutation first, stable sort after: ties resolve at random
    # but reproducibly per seed.
    perm = rng.permutation(split.pool_size)
    order = perm[np.argsort(-fuzz[perm], kind="stable")]
    return order[:h], 0


def run_experiment(cube, config):
    """Run one active-learning cell and return its iteration records.

    Iteration 0 logs the initial model; each later record logs one
    selection round: the queried samples' true labels come from the
    ground-truth raster and move from the pool to the training set before
    the classifier is retrained from scratch.
    """
    if cube.num_classes < 2:
        raise ValueError("cube must contain at least 2 classes")
    if cube.values.min() < 0.0 or cube.values.max() > 1.0:
        warnings.warn("cube does not look normalized to [0, 1]")
    if config.n_initial < cube.num_classes:
        warnings.warn("fewer initial samples than classes")

    dump_dir = None
    if config.debug_dir is not None:
        dump_dir = Path(config.debug_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)

    labeled = cube.labeled_indices()
    holdout_idx = np.array([], dtype=np.int64)
    subset = None
    if config.holdout > 0.0:
        rng = np.random.default_rng(_sub_seed(config.seed, 3, 0))
        n_hold = int(round(config.holdout * labeled.size))
        holdout_idx = np.sort(rng.choice(labeled, size=n_hold, replace=False))
        subset = labeled[~np.isin(labeled, holdout_idx)]

    split = initial_split(
        cube, config.n_initial, config.seed,
        stratified=config.stratified, subset=subset,
    )
    total = split.total_size

    def eval_indices():
        return holdout_idx if config.holdout > 0.0 else split.pool_idx

    t0 = time.perf_counter()
    model = _fit(cube, config, split, 0)
    records = [IterationRecord(
        iteration=0, train_size=split.train_size,
        candidate_count=0, selected=[],
        duration_ms=(time.perf_counter() - t0) * 1000.0,
        **_evaluate(cube, model, eval_indices()),
    )]

    iteration = 0
    while split.train_size < config.threshold and split.pool_size > 0:
        iteration += 1
        t0 = time.perf_counter()
        if config.strategy == "flg":
            positions, n_cand = _flg_selection(cube, config, model, split, iteration, dump_dir)
        else:
            positions, n_cand = _baseline_selection(cube, config, model, split, iteration)
        selected_flat = split.pool_idx[np.asarray(positions, dtype=np.int64)]

        before = (split.train_size, split.pool_size)
        split.move_to_train(selected_flat)
        if split.train_size + split.pool_size != total:
            raise AssertionError("train/pool conservation violated")
        if split.train_size != before[0] + len(selected_flat):
            raise AssertionError("selection size mismatch")

        model = _fit(cube, config, split, iteration)
        note = "pool_exhausted" if split.pool_size == 0 and split.train_size < config.threshold else ""
        records.append(IterationRecord(
            iteration=iteration, train_size=split.train_size,
            candidate_count=n_cand, selected=[int(i) for i in selected_flat],
            duration_ms=(time.perf_counter() - t0) * 1000.0,
            note=note,
            **_evaluate(cube, model, eval_indices()),
        ))
        if note:
            warnings.warn("pool exhausted before reaching the size threshold")
    return records


def run_baseline(cube, config):
    """Same loop with the selection arm swapped for uniform random picks."""
    if config.strategy == "flg":
        config = replace(config, strategy="random")
    return run_experiment(cube, config)


METRIC_FIELDS = ("oa", "aa", "kappa", "precision", "recall", "f1")


def average_runs(record_lists):
    """Per-iteration mean and sample standard deviation over aligned runs."""
    lengths = {len(rl) for rl in record_lists}
    if len(lengths) != 1:
        raise ValueError("record lists have different lengths")
    out = []
    for step in zip(*record_lists):
        sizes = {r.train_size for r in step}
        if len(sizes) != 1:
            raise ValueError("runs disagree on train size per iteration")
        row = {"iteration": step[0].iteration, "train_size": step[0].train_size}
        for name in METRIC_FIELDS:
            vals = np.array([getattr(r, name) for r in step], dtype=np.float64)
            row[f"{name}_mean"] = float(vals.mean())
            row[f"{name}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out.append(row)
    return out


def to_rows(records, seed, strategy):
    """Flatten records into curves.csv rows (column order = CSV_COLUMNS)."""
    rows = []
    for r in records:
        rows.append({
            "seed": seed, "iteration": r.iteration, "train_size": r.train_size,
            "oa": r.oa, "aa": r.aa, "kappa": r.kappa,
            "precision": r.precision, "recall": r.recall, "f1": r.f1,
            "strategy": strategy,
        })
    return rows


def timing_rows(records, seed, strategy):
    return [
        {"seed": seed, "iteration": r.iteration, "train_size": r.train_size,
         "duration_ms": r.duration_ms, "strategy": strategy}
        for r in records
    ]
