"""Hyperspectral cube I/O, normalization, synthesis, splitting, and patches.

Cube file format: a JSON header ``{bands, height, width, dtype, order}``
next to a raw binary payload. The payload is little-endian float32,
band-interleaved-by-pixel (all bands of pixel (0,0), then pixel (0,1), ...).
Labels use the same header/payload pair with dtype ``i32le`` and one band;
label 0 marks background, 1..C the annotated classes.
"""

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CUBE_DTYPE = "f32le"
LABEL_DTYPE = "i32le"
PIXEL_ORDER = "bip"


@dataclass
class HsiCube:
    """Radiance cube ``values[band, row, col]`` plus a label raster.

    Values are kept as float64 in memory; files store float32.
    """

    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int32)
        if self.values.ndim != 3:
            raise ValueError("values must be a (band, row, col) tensor")
        if self.labels.shape != self.values.shape[1:]:
            raise ValueError(
                "label raster dimension mismatch: labels %s vs raster %s"
                % (self.labels.shape, self.values.shape[1:])
            )
        if min(self.values.shape) < 1:
            raise ValueError("cube dimensions must all be >= 1")
        if not np.isfinite(self.values).all():
            raise ValueError("cube contains non-finite values")
        if self.labels.min() < 0:
            raise ValueError("labels must be >= 0 (0 = background)")

    @property
    def bands(self):
        return self.values.shape[0]

    @property
    def height(self):
        return self.values.shape[1]

    @property
    def width(self):
        return self.values.shape[2]

    @property
    def num_classes(self):
        return int(self.labels.max())

    def labeled_indices(self):
        """Flat raster indices (row * width + col) of non-background pixels."""
        return np.flatnonzero(self.labels.ravel() > 0)

    def spectra(self, flat_idx):
        """Spectral vectors for flat raster indices, shape (n, bands)."""
        flat_idx = np.asarray(flat_idx, dtype=np.int64)
        rows, cols = np.divmod(flat_idx, self.width)
        return self.values[:, rows, cols].T.copy()

    def coords(self, flat_idx):
        """(row, col) pairs for flat raster indices, shape (n, 2)."""
        flat_idx = np.asarray(flat_idx, dtype=np.int64)
        rows, cols = np.divmod(flat_idx, self.width)
        return np.stack([rows, cols], axis=1)

    def labels_at(self, flat_idx):
        return self.labels.ravel()[np.asarray(flat_idx, dtype=np.int64)]

    def sample(self, row, col):
        """The Sample at one raster position (label None for background)."""
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise ValueError("coordinate outside the raster")
        label = int(self.labels[row, col])
        return Sample(
            spectrum=self.values[:, row, col].copy(),
            coord=(row, col),
            label=label if label > 0 else None,
        )


@dataclass
class Sample:
    """One pixel: spectrum, raster coordinate, and (optional) class label."""

    spectrum: np.ndarray
    coord: tuple
    label: int | None = None


@dataclass
class PatchSample:
    """Bands x window**2 matrix of the spectra around a center pixel."""

    matrix: np.ndarray
    center: tuple


@dataclass
class SplitState:
    """Disjoint train/pool index sets over the labeled pixels of one cube."""

    train_idx: np.ndarray
    pool_idx: np.ndarray
    seed: int

    def __post_init__(self):
        self.train_idx = np.asarray(self.train_idx, dtype=np.int64)
        self.pool_idx = np.asarray(self.pool_idx, dtype=np.int64)
        if np.intersect1d(self.train_idx, self.pool_idx).size:
            raise ValueError("train and pool sets must be disjoint")

    @property
    def train_size(self):
        return int(self.train_idx.size)

    @property
    def pool_size(self):
        return int(self.pool_idx.size)

    @property
    def total_size(self):
        return self.train_size + self.pool_size

    def move_to_train(self, flat_indices):
        """Move the given pool members to the training set, keeping order."""
        flat_indices = np.asarray(flat_indices, dtype=np.int64)
        if flat_indices.size != np.unique(flat_indices).size:
            raise ValueError("duplicate indices in selection")
        in_pool = np.isin(flat_indices, self.pool_idx)
        if not in_pool.all():
            raise ValueError("selection contains indices not in the pool")
        keep = ~np.isin(self.pool_idx, flat_indices)
        self.pool_idx = self.pool_idx[keep]
        self.train_idx = np.concatenate([self.train_idx, flat_indices])


def _read_header(header_path):
    try:
        header = json.loads(Path(header_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed header {header_path}: {exc}") from exc
    for key in ("bands", "height", "width", "dtype", "order"):
        if key not in header:
            raise ValueError(f"malformed header {header_path}: missing '{key}'")
    if header["order"] != PIXEL_ORDER:
        raise ValueError(f"unsupported pixel order {header['order']!r}")
    for key in ("bands", "height", "width"):
        if not isinstance(header[key], int) or header[key] < 1:
            raise ValueError(f"malformed header {header_path}: bad '{key}'")
    return header


def _paths(path):
    """Resolve a prefix or header path into the four component files."""
    text = str(path)
    if text.endswith(".labels.json"):
        text = text[: -len(".labels.json")]
    elif text.endswith(".json"):
        text = text[: -len(".json")]
    return (
        Path(text + ".json"),
        Path(text + ".bin"),
        Path(text + ".labels.json"),
        Path(text + ".labels.bin"),
    )


def load_cube(path):
    """Load a cube (header + payload + label raster pair) from a path prefix."""
    hdr_path, bin_path, lab_hdr_path, lab_bin_path = _paths(path)
    header = _read_header(hdr_path)
    if header["dtype"] != CUBE_DTYPE:
        raise ValueError(f"unsupported cube dtype {header['dtype']!r}")
    bands, height, width = header["bands"], header["height"], header["width"]

    payload = np.fromfile(bin_path, dtype="<f4")
    expected = bands * height * width
    if payload.size != expected:
        raise ValueError(
            "payload size mismatch: %d values in %s, header implies %d"
            % (payload.size, bin_path, expected)
        )
    # BIP payload is pixel-major: reshape to (row, col, band) then reorder.
    values = payload.reshape(height, width, bands).transpose(2, 0, 1)

    lab_header = _read_header(lab_hdr_path)
    if lab_header["dtype"] != LABEL_DTYPE:
        raise ValueError(f"unsupported label dtype {lab_header['dtype']!r}")
    if (lab_header["height"], lab_header["width"]) != (height, width):
        raise ValueError(
            "label raster dimension mismatch: %dx%d labels vs %dx%d cube"
            % (lab_header["height"], lab_header["width"], height, width)
        )
    labels = np.fromfile(lab_bin_path, dtype="<i4")
    if labels.size != height * width:
        raise ValueError("payload size mismatch in label raster")
    return HsiCube(values=values, labels=labels.reshape(height, width))


def save_cube(cube, prefix):
    """Write a cube and its labels in the binary header+payload format."""
    hdr_path, bin_path, lab_hdr_path, lab_bin_path = _paths(prefix)
    hdr_path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "bands": cube.bands,
        "height": cube.height,
        "width": cube.width,
        "dtype": CUBE_DTYPE,
        "order": PIXEL_ORDER,
    }
    hdr_path.write_text(json.dumps(header, sort_keys=True) + "\n")
    cube.values.transpose(1, 2, 0).astype("<f4").tofile(bin_path)

    lab_header = dict(header, bands=1, dtype=LABEL_DTYPE)
    lab_hdr_path.write_text(json.dumps(lab_header, sort_keys=True) + "\n")
    cube.labels.astype("<i4").tofile(lab_bin_path)


def normalize(cube):
    """Min-max scale each band to [0, 1]; constant bands map to 0."""
    if not np.isfinite(cube.values).all():
        raise ValueError("cube contains non-finite values")
    v = cube.values
    mins = v.min(axis=(1, 2), keepdims=True)
    spans = v.max(axis=(1, 2), keepdims=True) - mins
    scaled = np.where(spans > 0, (v - mins) / np.where(spans > 0, spans, 1.0), 0.0)
    return HsiCube(values=scaled, labels=cube.labels.copy())


@dataclass
class SynthSpec:
    """Recipe for a synthetic labeled cube.

    Class regions are vertical strips inside a background border, so every
    label 0..classes occurs. Spectra are Gaussian around per-class mean
    profiles; by default those are bump-shaped profiles scaled by
    ``separation`` (smaller separation = more class overlap).
    """

    classes: int = 3
    bands: int = 20
    height: int = 64
    width: int = 64
    noise_sigma: float = 1.0
    separation: float = 2.0
    class_means: np.ndarray | None = None
    class_cov: np.ndarray | None = None
    border: int = 1
    strip_weights: tuple | None = None

    def resolved_means(self):
        """Per-class mean spectra, shape (classes, bands)."""
        if self.class_means is not None:
            means = np.asarray(self.class_means, dtype=np.float64)
            if means.shape != (self.classes, self.bands):
                raise ValueError("class_means must have shape (classes, bands)")
            return means
        idx = np.arange(self.bands, dtype=np.float64)
        centers = (np.arange(self.classes) + 0.5) * self.bands / self.classes
        bump_width = max(self.bands / (2.0 * self.classes), 1.0)
        return self.separation * np.exp(
            -0.5 * ((idx[None, :] - centers[:, None]) / bump_width) ** 2
        )


def synth_generate(spec, seed):
    """Generate a deterministic synthetic cube from a SynthSpec and a seed."""
    C, L, M, N = spec.classes, spec.bands, spec.height, spec.width
    if C < 2:
        raise ValueError("need at least 2 classes")
    if N - 2 * spec.border < C or M - 2 * spec.border < 1:
        raise ValueError("raster too small to tile one strip per class")

    labels = np.zeros((M, N), dtype=np.int32)
    weights = np.ones(C) if spec.strip_weights is None else np.asarray(spec.strip_weights, float)
    if weights.size != C or (weights <= 0).any():
        raise ValueError("strip_weights needs one positive weight per class")
    edges = spec.border + np.round(
        np.concatenate([[0.0], np.cumsum(weights) / weights.sum()]) * (N - 2 * spec.border)
    ).astype(int)
    for c in range(C):
        labels[spec.border : M - spec.border, edges[c] : edges[c + 1]] = c + 1
    if np.unique(labels).size != C + 1:
        raise ValueError("strip layout dropped a class; adjust weights or raster size")

    means = spec.resolved_means()
    mean_raster = np.zeros((M, N, L))
    for c in range(C):
        mean_raster[labels == c + 1] = means[c]

    rng = np.random.default_rng(seed)
    z = rng.standard_normal((M, N, L))
    if spec.class_cov is not None:
        cov = np.asarray(spec.class_cov, dtype=np.float64)
        if cov.shape != (L, L):
            raise ValueError("class_cov must have shape (bands, bands)")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("degenerate covariance (non-PSD)") from exc
        noise = z @ chol.T
    else:
        noise = spec.noise_sigma * z

    values = (mean_raster + noise).transpose(2, 0, 1)
    return HsiCube(values=values, labels=labels)


def initial_split(cube, n, seed, stratified=False, subset=None):
    """Draw n training pixels from the labeled pixels; the rest become the pool.

    The default draw is uniform over all labeled pixels. With
    ``stratified=True`` the draw takes an equal share per class. ``subset``
    restricts both sets to the given flat indices (used to carve out a
    held-out evaluation set first).
    """
    labeled = cube.labeled_indices() if subset is None else np.asarray(subset, dtype=np.int64)
    if n > labeled.size:
        raise ValueError(f"n={n} exceeds labeled pixel count {labeled.size}")
    rng = np.random.default_rng(seed)
    if stratified:
        label_vals = cube.labels_at(labeled)
        classes = np.unique(label_vals)
        base, rem = divmod(n, classes.size)
        picks = []
        for rank, c in enumerate(classes):
            quota = base + (1 if rank < rem else 0)
            members = labeled[label_vals == c]
            if quota > members.size:
                raise ValueError(
                    f"class {c} has only {members.size} pixels, needs {quota}"
                )
            picks.append(rng.choice(members, size=quota, replace=False))
        train = np.concatenate(picks)
    else:
        train = rng.choice(labeled, size=n, replace=False)
    pool = labeled[~np.isin(labeled, train)]
    if pool.size == 0:
        warnings.warn("initial split consumed every labeled pixel; pool is empty")
    return SplitState(train_idx=train, pool_idx=pool, seed=seed)


def _reflect_index(idx, size):
    """Mirror out-of-range indices about the array edges (no edge repeat)."""
    if size == 1:
        return np.zeros_like(idx)
    period = 2 * (size - 1)
    idx = np.abs(idx) % period
    return np.where(idx >= size, period - idx, idx)


def extract_patch(cube, coord, window):
    """Extract the bands x window**2 patch centered at coord (row-major cells)."""
    if window % 2 == 0:
        raise ValueError("window size must be odd")
    row, col = coord
    half = window // 2
    rows = _reflect_index(np.arange(row - half, row + half + 1), cube.height)
    cols = _reflect_index(np.arange(col - half, col + half + 1), cube.width)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    matrix = cube.values[:, rr.ravel(), cc.ravel()]
    return PatchSample(matrix=matrix, center=(row, col))
