"""Orthographic top-down depth camera over the square workspace.

Pixel convention: row 0 is the workspace -y edge, column 0 the -x edge.
A world point maps to the pixel whose cell contains it (floor mapping);
the inverse map returns the cell's lower corner, so the workspace center
round-trips to exactly (0, 0) through pixel (112, 112) at 224 resolution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvalidInput
from .raster import rasterize_triangles
from .state import ClothState


@dataclass(frozen=True)
class OrthoCamera:
    resolution: int = 224
    extent: float = 1.0

    @property
    def meters_per_pixel(self) -> float:
        return self.extent / self.resolution

    def world_to_pixel_continuous(self, xy: np.ndarray) -> np.ndarray:
        """(N, 2) world (x, y) -> (N, 2) continuous (col, row)."""
        xy = np.atleast_2d(xy)
        return (xy + 0.5 * self.extent) / self.meters_per_pixel

    def world_to_pixel(self, xy) -> np.ndarray:
        """(N, 2) world (x, y) -> (N, 2) integer (row, col); may be out of bounds."""
        cont = self.world_to_pixel_continuous(np.asarray(xy, dtype=float))
        cols = np.floor(cont[:, 0]).astype(np.int64)
        rows = np.floor(cont[:, 1]).astype(np.int64)
        return np.column_stack([rows, cols])

    def pixel_to_world(self, row: float, col: float) -> tuple[float, float]:
        """Pixel (row, col) -> world (x, y) of the cell's lower corner."""
        mpp = self.meters_per_pixel
        return (col * mpp - 0.5 * self.extent, row * mpp - 0.5 * self.extent)

    def in_bounds(self, rows_cols: np.ndarray) -> np.ndarray:
        r, c = rows_cols[:, 0], rows_cols[:, 1]
        n = self.resolution
        return (r >= 0) & (r < n) & (c >= 0) & (c < n)


def render_depth(
    state: ClothState,
    camera: OrthoCamera = OrthoCamera(),
    thickness: float = 0.0,
) -> np.ndarray:
    """Height map of the topmost cloth surface; 0 where the table is visible.

    Particles model the sheet midplane; a nonzero `thickness` raises the
    rendered surface by half of it, which keeps cloth resting on the table
    distinguishable from the table itself.
    """
    n = camera.resolution
    half = 0.5 * thickness
    tris = state.triangles_xyz()
    if len(tris):
        tri_px = camera.world_to_pixel_continuous(tris[:, :, :2].reshape(-1, 2)).reshape(-1, 3, 2)
        img = rasterize_triangles(tri_px, (n, n), z=tris[:, :, 2] + half)
    else:
        img = np.full((n, n), -np.inf)

    if state.n_particles:
        px = camera.world_to_pixel(state.positions[:, :2])
        ok = camera.in_bounds(px)
        if np.any(ok):
            flat = px[ok, 0] * n + px[ok, 1]
            np.maximum.at(img.ravel(), flat, state.positions[ok, 2] + half)

    img[~np.isfinite(img)] = 0.0
    np.maximum(img, 0.0, out=img)
    return img.astype(np.float32)


def save_depth_raw(img: np.ndarray, path: str | Path, camera: OrthoCamera = OrthoCamera()) -> None:
    """Write a frame as float32 little-endian raw plus a JSON sidecar."""
    path = Path(path)
    img = np.ascontiguousarray(img, dtype="<f4")
    path.write_bytes(img.tobytes())
    sidecar = {
        "width": int(img.shape[1]),
        "height": int(img.shape[0]),
        "meters_per_pixel": camera.meters_per_pixel,
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_depth_raw(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    img = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(meta["height"], meta["width"])
    return img.copy(), meta


def check_frame_shape(frame: np.ndarray, camera: OrthoCamera) -> None:
    n = camera.resolution
    if frame.shape != (n, n):
        raise InvalidInput(f"expected {n}x{n} depth frame, got {frame.shape}")
