import numpy as np
import pytest

from clasp.errors import InvalidParameter, SchemaMismatch
from clasp.percept import (
    Keypoint,
    SemanticKeypointSet,
    akd,
    ap_at,
    extract_keypoints,
    make_heatmaps,
    mean_ap,
    project_keypoints,
    vocabulary_for,
)
from clasp.sim import instantiate_cloth


def keypoint_set(category, pixels):
    vocab = vocabulary_for(category)
    kps = [
        Keypoint(descriptor=d, row=int(r), col=int(c))
        for d, (r, c) in zip(vocab.descriptors, pixels)
    ]
    return SemanticKeypointSet(category=category, keypoints=kps)


class TestProjection:
    def test_flat_towel_corner_pixels(self, towel, camera):
        kps = project_keypoints(instantiate_cloth(towel), camera)
        by_name = {kp.descriptor: (kp.row, kp.col) for kp in kps.keypoints}
        assert by_name["corner_top_left"] == (145, 78)
        assert by_name["corner_top_right"] == (145, 145)
        assert by_name["corner_bottom_left"] == (78, 78)
        assert by_name["corner_bottom_right"] == (78, 145)
        assert not any(kp.occluded for kp in kps.keypoints)

    def test_180_rotation_swaps_corners(self, towel, camera):
        a = project_keypoints(instantiate_cloth(towel), camera)
        b = project_keypoints(instantiate_cloth(towel, pose=(np.pi, 0, 0)), camera)
        assert (b.get("corner_top_left").row, b.get("corner_top_left").col) == (
            a.get("corner_bottom_right").row,
            a.get("corner_bottom_right").col,
        )
        assert (b.get("corner_bottom_right").row, b.get("corner_bottom_right").col) == (
            a.get("corner_top_left").row,
            a.get("corner_top_left").col,
        )

    def test_half_fold_marks_occluded(self, towel, camera):
        state = instantiate_cloth(towel)
        left = state.positions[:, 0] < -1e-12
        state.positions[left, 0] *= -1.0
        state.positions[left, 2] = 0.001
        kps = project_keypoints(state, camera)
        occluded = {kp.descriptor for kp in kps.keypoints if kp.occluded}
        assert occluded == {"corner_top_right", "corner_bottom_right"}
        # positions still emitted for occluded keypoints
        assert kps.get("corner_top_right").world is not None

    def test_rotation_equivariance(self, towel, camera):
        theta = 0.5
        base = instantiate_cloth(towel)
        rot = instantiate_cloth(towel, pose=(theta, 0, 0))
        kp0 = project_keypoints(base, camera)
        kp1 = project_keypoints(rot, camera)
        center = 0.5 * camera.resolution
        c, s = np.cos(theta), np.sin(theta)
        for a, b in zip(kp0.keypoints, kp1.keypoints):
            # continuous pixel of the unrotated anchor, rotated in image space
            u = np.array([a.world[0], a.world[1]])
            cont = camera.world_to_pixel_continuous(u)[0] - center
            expected_col = c * cont[0] - s * cont[1] + center
            expected_row = s * cont[0] + c * cont[1] + center
            assert abs(b.col - np.floor(expected_col)) <= 1.0
            assert abs(b.row - np.floor(expected_row)) <= 1.0


class TestHeatmaps:
    def test_peak_value(self):
        kps = keypoint_set("towel", [(50, 60), (10, 10), (200, 100), (30, 205)])
        hm = make_heatmaps(kps, sigma=4.0)
        assert hm[0, 50, 60] == 1.0

    def test_gaussian_arithmetic(self):
        kps = keypoint_set("towel", [(50, 60), (10, 10), (200, 100), (30, 205)])
        hm = make_heatmaps(kps, sigma=4.0)
        assert hm[0, 50, 64] == pytest.approx(np.exp(-0.5))

    def test_zero_sigma_rejected(self):
        kps = keypoint_set("towel", [(50, 60), (10, 10), (200, 100), (30, 205)])
        with pytest.raises(InvalidParameter):
            make_heatmaps(kps, sigma=0.0)


class TestExtract:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(1)
        vocab = vocabulary_for("towel")
        for _ in range(50):
            pixels = rng.integers(0, 224, size=(4, 2))
            kps = keypoint_set("towel", pixels)
            out = extract_keypoints(make_heatmaps(kps, sigma=4.0), vocab)
            assert np.array_equal(out.pixels(), kps.pixels())

    def test_all_zero_channel(self):
        vocab = vocabulary_for("towel")
        out = extract_keypoints(np.zeros((4, 224, 224)), vocab)
        assert (out.keypoints[0].row, out.keypoints[0].col) == (0, 0)
        assert out.keypoints[0].confidence == 0.0

    def test_tie_breaks_row_major(self):
        vocab = vocabulary_for("towel")
        hm = np.zeros((4, 224, 224))
        hm[0, 3, 5] = 0.7
        hm[0, 7, 2] = 0.7
        out = extract_keypoints(hm, vocab)
        assert (out.keypoints[0].row, out.keypoints[0].col) == (3, 5)

    def test_channel_mismatch(self):
        with pytest.raises(SchemaMismatch):
            extract_keypoints(np.zeros((3, 224, 224)), vocabulary_for("towel"))


class TestMetrics:
    def test_perfect_prediction(self):
        gt = keypoint_set("towel", [(10, 10), (20, 20), (30, 30), (40, 40)])
        assert akd(gt, gt) == 0.0
        for tau in (8, 4, 2):
            assert ap_at(gt, gt, tau) == 1.0

    def test_uniform_offset(self):
        gt = keypoint_set("towel", [(10, 10), (20, 20), (30, 30), (40, 40)])
        pred = keypoint_set("towel", [(13, 10), (23, 20), (33, 30), (43, 40)])
        assert akd(pred, gt) == pytest.approx(3.0)

    def test_single_offset_345(self):
        gt = keypoint_set("towel", [(10, 10), (20, 20), (30, 30), (40, 40)])
        pred = keypoint_set("towel", [(13, 14), (20, 20), (30, 30), (40, 40)])
        assert akd(pred, gt) == pytest.approx(1.25)

    def test_hand_case_1359(self):
        gt = keypoint_set("towel", [(10, 10), (50, 50), (100, 100), (150, 150)])
        pred = keypoint_set("towel", [(10, 11), (50, 53), (100, 105), (150, 159)])
        assert ap_at(pred, gt, 8) == pytest.approx(0.75)
        assert ap_at(pred, gt, 4) == pytest.approx(0.5)
        assert ap_at(pred, gt, 2) == pytest.approx(0.25)
        assert mean_ap(pred, gt) == pytest.approx(0.5)

    def test_vocab_mismatch(self):
        gt = keypoint_set("towel", [(10, 10), (20, 20), (30, 30), (40, 40)])
        pred = keypoint_set("skirt", [(10, 10), (20, 20), (30, 30), (40, 40)])
        with pytest.raises(SchemaMismatch):
            akd(pred, gt)

    def test_ap_monotone_in_tau(self):
        rng = np.random.default_rng(2)
        gt = keypoint_set("towel", rng.integers(0, 224, (4, 2)))
        pred = keypoint_set("towel", rng.integers(0, 224, (4, 2)))
        values = [ap_at(pred, gt, tau) for tau in (1, 2, 4, 8, 16, 300)]
        assert values == sorted(values)
        assert values[-1] == 1.0


class TestSerialization:
    def test_json_round_trip(self, towel, camera, tmp_path):
        kps = project_keypoints(instantiate_cloth(towel), camera)
        path = tmp_path / "kps.json"
        kps.save_json(path)
        loaded = SemanticKeypointSet.load_json(path)
        assert np.array_equal(loaded.pixels(), kps.pixels())
        assert loaded.category == kps.category
        assert [k.occluded for k in loaded.keypoints] == [k.occluded for k in kps.keypoints]
