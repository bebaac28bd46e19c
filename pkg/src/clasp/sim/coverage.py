"""Projected cloth footprint area on the table."""

from __future__ import annotations

import numpy as np

from .raster import rasterize_triangles
from .state import ClothState


def coverage(state: ClothState, cell: float = 0.001, extent: float = 1.0) -> float:
    """Area (m^2) of the cloth's table projection, rasterized at `cell` meters."""
    tris = state.triangles_xyz()
    if len(tris) == 0:
        return 0.0
    n = int(round(extent / cell))
    tri_px = (tris[:, :, :2].reshape(-1, 2) + 0.5 * extent) / cell
    mask = rasterize_triangles(tri_px.reshape(-1, 3, 2), (n, n))
    return float(mask.sum()) * cell * cell
