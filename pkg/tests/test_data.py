import json

import numpy as np
import pytest

from flg.data import (
    HsiCube,
    SynthSpec,
    extract_patch,
    initial_split,
    load_cube,
    normalize,
    save_cube,
    synth_generate,
)


def write_cube_files(tmp_path, values, labels, prefix="cube"):
    cube = HsiCube(values=values, labels=labels)
    save_cube(cube, tmp_path / prefix)
    return tmp_path / prefix


class TestLoadCube:
    def test_tiny_cube_roundtrip(self, tmp_path):
        values = np.arange(12, dtype=np.float64).reshape(3, 2, 2)
        labels = np.array([[0, 1], [2, 1]], dtype=np.int32)
        prefix = write_cube_files(tmp_path, values, labels)

        cube = load_cube(prefix)
        assert (cube.bands, cube.height, cube.width) == (3, 2, 2)
        assert cube.values.size == 12
        np.testing.assert_array_equal(cube.values, values)
        np.testing.assert_array_equal(cube.labels, labels)

    def test_accepts_header_path(self, tmp_path):
        values = np.zeros((2, 2, 2))
        labels = np.zeros((2, 2), dtype=np.int32)
        prefix = write_cube_files(tmp_path, values, labels)
        cube = load_cube(str(prefix) + ".json")
        assert cube.bands == 2

    def test_truncated_payload(self, tmp_path):
        values = np.ones((3, 2, 2))
        labels = np.zeros((2, 2), dtype=np.int32)
        prefix = write_cube_files(tmp_path, values, labels)
        payload = (tmp_path / "cube.bin").read_bytes()
        (tmp_path / "cube.bin").write_bytes(payload[:-4])
        with pytest.raises(ValueError, match="payload size mismatch"):
            load_cube(prefix)

    def test_malformed_header(self, tmp_path):
        values = np.ones((2, 2, 2))
        labels = np.zeros((2, 2), dtype=np.int32)
        prefix = write_cube_files(tmp_path, values, labels)
        hdr = json.loads((tmp_path / "cube.json").read_text())
        del hdr["bands"]
        (tmp_path / "cube.json").write_text(json.dumps(hdr))
        with pytest.raises(ValueError, match="malformed header"):
            load_cube(prefix)

    def test_label_dimension_mismatch(self, tmp_path):
        values = np.ones((2, 3, 3))
        labels = np.zeros((3, 3), dtype=np.int32)
        prefix = write_cube_files(tmp_path, values, labels)
        lab_hdr = json.loads((tmp_path / "cube.labels.json").read_text())
        lab_hdr["height"] = 2
        (tmp_path / "cube.labels.json").write_text(json.dumps(lab_hdr))
        with pytest.raises(ValueError, match="label raster dimension mismatch"):
            load_cube(prefix)

    def test_many_band_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.random((200, 9, 11)).astype(np.float32).astype(np.float64)
        labels = rng.integers(0, 17, size=(9, 11)).astype(np.int32)
        prefix = write_cube_files(tmp_path, values, labels)
        cube = load_cube(prefix)
        assert cube.bands == 200
        np.testing.assert_array_equal(cube.values, values)


class TestNormalize:
    def test_minmax_by_hand(self):
        values = np.array([2.0, 4.0, 6.0]).reshape(1, 1, 3)
        labels = np.zeros((1, 3), dtype=np.int32)
        out = normalize(HsiCube(values=values, labels=labels))
        np.testing.assert_allclose(out.values.ravel(), [0.0, 0.5, 1.0])

    def test_constant_band_maps_to_zero(self):
        values = np.full((1, 1, 3), 5.0)
        out = normalize(HsiCube(values=values, labels=np.zeros((1, 3), dtype=np.int32)))
        np.testing.assert_array_equal(out.values, np.zeros((1, 1, 3)))

    def test_random_cube_range(self):
        rng = np.random.default_rng(3)
        values = rng.normal(10.0, 4.0, size=(6, 8, 9))
        out = normalize(HsiCube(values=values, labels=np.zeros((8, 9), dtype=np.int32)))
        assert out.values.min() >= 0.0 and out.values.max() <= 1.0
        for b in range(6):
            assert out.values[b].min() == 0.0
            assert out.values[b].max() == 1.0

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=(4, 5, 5))
        labels = np.zeros((5, 5), dtype=np.int32)
        once = normalize(HsiCube(values=values, labels=labels))
        twice = normalize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)


class TestSynth:
    def test_separable_limit_one_nn(self):
        spec = SynthSpec(classes=2, bands=8, height=12, width=12,
                         noise_sigma=1e-6, separation=5.0)
        cube = synth_generate(spec, 11)
        split = initial_split(cube, 20, seed=1)
        train_x = cube.spectra(split.train_idx)
        train_y = cube.labels_at(split.train_idx)
        test_x = cube.spectra(split.pool_idx)
        test_y = cube.labels_at(split.pool_idx)
        # Independent 1-NN: plain argmin over explicit distances.
        d2 = ((test_x[:, None, :] - train_x[None, :, :]) ** 2).sum(axis=2)
        pred = train_y[np.argmin(d2, axis=1)]
        assert (pred == test_y).all()

    def test_deterministic_per_seed(self):
        spec = SynthSpec(classes=3, bands=5, height=10, width=10)
        a = synth_generate(spec, 99)
        b = synth_generate(spec, 99)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_class_sample_means(self):
        spec = SynthSpec(classes=3, bands=20, height=64, width=64, noise_sigma=1.0)
        cube = synth_generate(spec, 5)
        means = spec.resolved_means()
        for c in range(1, 4):
            mask = cube.labels == c
            n_c = mask.sum()
            emp = cube.values[:, mask].mean(axis=1)
            bound = 3.0 * spec.noise_sigma / np.sqrt(n_c)
            assert np.abs(emp - means[c - 1]).max() <= bound

    def test_labels_cover_all_values(self):
        cube = synth_generate(SynthSpec(classes=3, bands=4, height=16, width=16), 2)
        assert set(np.unique(cube.labels)) == {0, 1, 2, 3}

    def test_degenerate_covariance(self):
        cov = -np.eye(4)
        spec = SynthSpec(classes=2, bands=4, height=8, width=8, class_cov=cov)
        with pytest.raises(ValueError, match="degenerate covariance"):
            synth_generate(spec, 0)


class TestInitialSplit:
    @pytest.fixture()
    def cube(self):
        return synth_generate(SynthSpec(classes=3, bands=4, height=20, width=20), 8)

    def test_sizes_and_disjoint(self, cube):
        labeled = cube.labeled_indices().size
        split = initial_split(cube, 50, seed=0)
        assert split.train_size == 50
        assert split.pool_size == labeled - 50
        assert np.intersect1d(split.train_idx, split.pool_idx).size == 0

    def test_background_excluded(self, cube):
        split = initial_split(cube, 50, seed=0)
        assert (cube.labels_at(split.train_idx) > 0).all()
        assert (cube.labels_at(split.pool_idx) > 0).all()

    def test_full_draw_empty_pool_warns(self, cube):
        n = cube.labeled_indices().size
        with pytest.warns(UserWarning, match="pool is empty"):
            split = initial_split(cube, n, seed=0)
        assert split.pool_size == 0

    def test_too_many_requested(self, cube):
        with pytest.raises(ValueError, match="exceeds labeled pixel count"):
            initial_split(cube, cube.labeled_indices().size + 1, seed=0)

    def test_seed_determinism(self, cube):
        a = initial_split(cube, 40, seed=5)
        b = initial_split(cube, 40, seed=5)
        c = initial_split(cube, 40, seed=6)
        np.testing.assert_array_equal(a.train_idx, b.train_idx)
        assert not np.array_equal(np.sort(a.train_idx), np.sort(c.train_idx))

    def test_stratified_equal_shares(self, cube):
        split = initial_split(cube, 30, seed=1, stratified=True)
        counts = np.bincount(cube.labels_at(split.train_idx), minlength=4)[1:]
        assert counts.tolist() == [10, 10, 10]

    def test_move_preserves_union(self, cube):
        split = initial_split(cube, 30, seed=2)
        total = split.total_size
        chosen = split.pool_idx[[3, 1, 4]].copy()
        split.move_to_train(chosen)
        assert split.total_size == total
        assert np.intersect1d(split.train_idx, split.pool_idx).size == 0
        np.testing.assert_array_equal(split.train_idx[-3:], chosen)


class TestExtractPatch:
    @pytest.fixture()
    def cube(self):
        rng = np.random.default_rng(0)
        return HsiCube(values=rng.random((5, 6, 7)),
                       labels=np.zeros((6, 7), dtype=np.int32))

    def test_identity_window(self, cube):
        patch = extract_patch(cube, (2, 3), 1)
        assert patch.matrix.shape == (5, 1)
        np.testing.assert_array_equal(patch.matrix[:, 0], cube.values[:, 2, 3])

    def test_even_window_rejected(self, cube):
        with pytest.raises(ValueError, match="odd"):
            extract_patch(cube, (2, 3), 2)

    def test_corner_mirroring(self, cube):
        patch = extract_patch(cube, (0, 0), 3)
        assert patch.matrix.shape == (5, 9)
        unique_cols = {tuple(col) for col in patch.matrix.T}
        assert len(unique_cols) == 4  # only the in-bounds window cells survive

    def test_interior_row_major_oracle(self, cube):
        patch = extract_patch(cube, (3, 3), 3)
        k = 0
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                np.testing.assert_array_equal(
                    patch.matrix[:, k], cube.values[:, 3 + dr, 3 + dc]
                )
                k += 1


class TestSampleAccessor:
    def test_sample_fields(self):
        cube = synth_generate(SynthSpec(classes=2, bands=4, height=8, width=8), 1)
        s = cube.sample(3, 3)
        assert s.spectrum.shape == (4,)
        np.testing.assert_array_equal(s.spectrum, cube.values[:, 3, 3])
        assert s.coord == (3, 3)
        assert s.label == int(cube.labels[3, 3])
        corner = cube.sample(0, 0)
        assert corner.label is None  # border is background

    def test_out_of_bounds(self):
        cube = synth_generate(SynthSpec(classes=2, bands=4, height=8, width=8), 1)
        with pytest.raises(ValueError):
            cube.sample(8, 0)
