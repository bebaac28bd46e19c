"""Batched triangle rasterization on a square pixel grid.

Shared by depth rendering (224 px, max-z with barycentric interpolation) and
coverage measurement (1 mm grid, binary footprint). Pixel (r, c) samples the
continuous point (c + 0.5, r + 0.5); triangles are tested at pixel centers.
"""

from __future__ import annotations

import numpy as np


def _candidate_grid(tri_px: np.ndarray, height: int, width: int):
    """Per-triangle bounding-box pixel candidates, padded to a common shape.

    Returns (rows, cols, valid) each shaped (M, bh, bw); valid is False for
    padding cells and for pixels outside the canvas.
    """
    lo = np.ceil(tri_px.min(axis=1) - 0.5).astype(np.int64)
    hi = np.floor(tri_px.max(axis=1) - 0.5).astype(np.int64)
    c0 = np.clip(lo[:, 0], 0, width - 1)
    r0 = np.clip(lo[:, 1], 0, height - 1)
    c1 = np.clip(hi[:, 0], -1, width - 1)
    r1 = np.clip(hi[:, 1], -1, height - 1)
    bw = int(np.maximum(c1 - c0 + 1, 0).max(initial=0))
    bh = int(np.maximum(r1 - r0 + 1, 0).max(initial=0))
    if bw == 0 or bh == 0:
        return None
    rows = r0[:, None, None] + np.arange(bh)[None, :, None]
    cols = c0[:, None, None] + np.arange(bw)[None, None, :]
    valid = (rows <= r1[:, None, None]) & (cols <= c1[:, None, None])
    return rows, cols, valid


def rasterize_triangles(
    tri_px: np.ndarray,
    shape: tuple[int, int],
    z: np.ndarray | None = None,
) -> np.ndarray:
    """Rasterize triangles given in continuous pixel coordinates.

    tri_px: (M, 3, 2) vertices as (col, row) pixel coordinates.
    shape:  (height, width) of the canvas.
    z:      optional (M, 3) per-vertex values; the result holds the maximum
            interpolated value per covered pixel (-inf elsewhere). Without z,
            the result is a boolean coverage mask.
    """
    height, width = shape
    if z is None:
        canvas = np.zeros(height * width, dtype=bool)
    else:
        canvas = np.full(height * width, -np.inf)
    if len(tri_px) == 0:
        return canvas.reshape(shape)

    grid = _candidate_grid(tri_px, height, width)
    if grid is None:
        return canvas.reshape(shape)
    rows, cols, valid = grid

    px = cols + 0.5
    py = rows + 0.5
    ax, ay = tri_px[:, 0, 0, None, None], tri_px[:, 0, 1, None, None]
    bx, by = tri_px[:, 1, 0, None, None], tri_px[:, 1, 1, None, None]
    cx, cy = tri_px[:, 2, 0, None, None], tri_px[:, 2, 1, None, None]

    # Edge functions; w0+w1+w2 equals the signed doubled area.
    w0 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    w1 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    w2 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)

    inside = ((w0 >= 0) & (w1 >= 0) & (w2 >= 0)) | ((w0 <= 0) & (w1 <= 0) & (w2 <= 0))
    inside &= valid & (np.abs(area) > 1e-30)

    flat = (rows * width + cols)[inside]
    if z is None:
        canvas[flat] = True
    else:
        zs = (
            w0 * z[:, 0, None, None] + w1 * z[:, 1, None, None] + w2 * z[:, 2, None, None]
        ) / np.where(np.abs(area) > 1e-30, area, 1.0)
        np.maximum.at(canvas, flat, zs[inside])
    return canvas.reshape(shape)
