import numpy as np
import pytest

from clasp.sim import OrthoCamera, render_depth, save_depth_raw, load_depth_raw

from conftest import free_particles


class TestMapping:
    def test_center_pixel(self, camera):
        assert tuple(camera.world_to_pixel([[0.0, 0.0]])[0]) == (112, 112)

    def test_inverse_is_cell_corner(self, camera):
        assert camera.pixel_to_world(112, 112) == (0.0, 0.0)

    def test_towel_corner_pixels(self, camera):
        # +-0.15 m corners bound a 67 px square
        px = camera.world_to_pixel([[-0.15, -0.15], [0.15, 0.15]])
        assert tuple(px[0]) == (78, 78)
        assert tuple(px[1]) == (145, 145)

    def test_row0_at_minus_y_edge(self, camera):
        px = camera.world_to_pixel([[0.0, -0.499]])[0]
        assert px[0] == 0


class TestRenderDepth:
    def test_raised_flat_cloth(self, flat_towel, camera):
        state = flat_towel.copy()
        state.positions[:, 2] = 0.02
        img = render_depth(state, camera)
        cloth = img[img > 0]
        assert len(cloth) > 0
        assert np.allclose(cloth, 0.02, atol=1e-6)
        assert img[0, 0] == 0.0

    def test_single_particle_center(self, camera):
        state = free_particles([[0.0, 0.0, 0.05], [0.4, 0.4, 0.03], [-0.4, 0.4, 0.0], [0.4, -0.4, 0.0]])
        img = render_depth(state, camera)
        assert img[112, 112] == np.float32(0.05)

    def test_outside_workspace_clipped(self, camera):
        state = free_particles([[0.9, 0.9, 0.05], [-0.9, 0.0, 0.1], [0, 0.9, 0.1], [0.9, 0, 0.1]])
        img = render_depth(state, camera)
        assert img.max() == 0.0

    def test_deterministic(self, flat_towel, camera):
        a = render_depth(flat_towel, camera)
        b = render_depth(flat_towel, camera)
        assert np.array_equal(a, b)


class TestRawExport:
    def test_round_trip(self, flat_towel, camera, tmp_path):
        state = flat_towel.copy()
        state.positions[:, 2] = 0.015
        img = render_depth(state, camera)
        out = tmp_path / "frame.raw"
        save_depth_raw(img, out, camera)
        loaded, meta = load_depth_raw(out)
        assert np.array_equal(loaded, img)
        assert meta["width"] == 224 and meta["height"] == 224
        assert meta["meters_per_pixel"] == pytest.approx(1.0 / 224)
        # raw payload is exactly width*height float32
        assert out.stat().st_size == 224 * 224 * 4
