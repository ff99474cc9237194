#!/usr/bin/env python3
"""One-shot converter from public MATLAB-format hyperspectral scenes (and
their ground-truth rasters) to the binary cube format used by the flg
pipeline: a JSON header plus a little-endian float32 band-interleaved
payload, with an int32 label raster alongside.

Band removals are data, not code: recipes.json lists, per dataset, the raw
shape, the 1-based bands to drop (or keep), and the class count. Values are
cast to float32 and otherwise copied verbatim; all scaling happens later in
the pipeline.

Usage:
    convert.py --dataset indian_pines --cube Indian_pines.mat \
               --gt Indian_pines_gt.mat --out data/ipd
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import scipy.io

RECIPES_PATH = Path(__file__).parent / "recipes.json"


def load_recipes(path=RECIPES_PATH):
    return json.loads(Path(path).read_text())


def _expand_ranges(spans):
    """[[10, 55], 7] style lists of 1-based bands into a sorted index list."""
    out = []
    for span in spans:
        if isinstance(span, list):
            out.extend(range(span[0], span[1] + 1))
        else:
            out.append(span)
    return sorted(out)


def kept_band_indices(recipe, total_bands, bands_keep=None):
    """0-based indices of the bands retained after the recipe's removals."""
    if bands_keep is not None:
        keep = sorted(bands_keep)
    elif "keep_bands" in recipe:
        keep = _expand_ranges(recipe["keep_bands"])
    else:
        drop = set(_expand_ranges(recipe.get("drop_bands", [])))
        keep = [b for b in range(1, total_bands + 1) if b not in drop]
    for b in keep:
        if not 1 <= b <= total_bands:
            raise ValueError(f"band {b} outside 1..{total_bands}")
    return [b - 1 for b in keep]


def read_mat_array(path, ndim):
    """Largest numeric array with the given rank from a v5 or v7.3 MAT file."""
    path = Path(path)
    try:
        payload = scipy.io.loadmat(path)
        arrays = [
            v for k, v in payload.items()
            if not k.startswith("__") and isinstance(v, np.ndarray)
            and v.ndim == ndim and v.dtype.kind in "uif"
        ]
    except (NotImplementedError, ValueError):
        # v7.3 files are HDF5 (scipy refuses them); MATLAB stores arrays
        # column-major, so transpose back after reading.
        import h5py

        arrays = []
        with h5py.File(path, "r") as fh:
            for key in fh:
                if key.startswith("#"):
                    continue
                node = fh[key]
                if hasattr(node, "shape") and len(node.shape) == ndim:
                    arrays.append(np.asarray(node).transpose(range(ndim)[::-1]))
    if not arrays:
        raise ValueError(f"no rank-{ndim} numeric array found in {path}")
    return max(arrays, key=lambda a: a.size)


def _write_header(path, bands, height, width, dtype):
    header = {
        "bands": bands, "height": height, "width": width,
        "dtype": dtype, "order": "bip",
    }
    path.write_text(json.dumps(header, sort_keys=True) + "\n")


def convert(cube_path, gt_path, recipe, out_prefix, bands_keep=None):
    """Drop bands, cast to float32, and write cube + labels + manifest."""
    raw = read_mat_array(cube_path, ndim=3)
    expected = tuple(recipe["raw_shape"])
    if raw.shape != expected:
        raise ValueError(f"dimension mismatch: cube is {raw.shape}, recipe expects {expected}")
    gt = read_mat_array(gt_path, ndim=2)
    if gt.shape != expected[:2]:
        raise ValueError(f"dimension mismatch: ground truth is {gt.shape}, "
                         f"expected {expected[:2]}")

    keep = kept_band_indices(recipe, raw.shape[2], bands_keep)
    cube = raw[:, :, keep]
    height, width, bands = cube.shape
    labels = gt.astype("<i4")

    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    _write_header(Path(str(out_prefix) + ".json"), bands, height, width, "f32le")
    cube.astype("<f4").tofile(str(out_prefix) + ".bin")
    _write_header(Path(str(out_prefix) + ".labels.json"), 1, height, width, "i32le")
    labels.tofile(str(out_prefix) + ".labels.bin")

    values, counts = np.unique(labels, return_counts=True)
    manifest = {
        "dataset": recipe.get("name", out_prefix.name),
        "raw_shape": list(raw.shape),
        "output_shape": [height, width, bands],
        "kept_bands": len(keep),
        "classes": int(recipe["classes"]),
        "class_histogram": {int(v): int(c) for v, c in zip(values, counts)},
    }
    Path(str(out_prefix) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--cube", required=True, help="raw scene .mat file")
    parser.add_argument("--gt", required=True, help="ground-truth .mat file")
    parser.add_argument("--out", required=True, help="output path prefix")
    parser.add_argument("--recipes", default=str(RECIPES_PATH))
    parser.add_argument("--bands-keep", default=None,
                        help="comma-separated 1-based bands to keep, overriding the recipe")
    args = parser.parse_args(argv)

    recipes = load_recipes(args.recipes)
    if args.dataset not in recipes:
        print(f"unknown dataset {args.dataset!r}; known: {sorted(recipes)}", file=sys.stderr)
        return 1
    recipe = dict(recipes[args.dataset], name=args.dataset)
    bands_keep = None
    if args.bands_keep:
        bands_keep = [int(b) for b in args.bands_keep.split(",")]

    try:
        manifest = convert(args.cube, args.gt, recipe, args.out, bands_keep)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
