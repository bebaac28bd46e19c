"""Parametric planar garment templates.

Each category is a hand-designed simple polygon (meters, garment frame:
+y is the garment's top, x its left/right axis) with named anchor points.
Building a template samples a regular particle grid clipped to the outline,
triangulates it, lays out structural/shear/bend springs, and resolves every
vocabulary descriptor to its nearest grid vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidTemplate
from ..vocab import CATEGORY_DESCRIPTORS, vocabulary_for

# Base outlines (counter-clockwise) and anchor points, meters.
CATEGORY_OUTLINES: dict[str, list[tuple[float, float]]] = {
    "towel": [(-0.15, -0.15), (0.15, -0.15), (0.15, 0.15), (-0.15, 0.15)],
    "tshirt": [
        (-0.18, -0.25), (0.18, -0.25), (0.18, 0.10), (0.30, 0.10),
        (0.30, 0.25), (-0.30, 0.25), (-0.30, 0.10), (-0.18, 0.10),
    ],
    "trousers": [
        (-0.15, 0.30), (0.15, 0.30), (0.15, -0.30), (0.04, -0.30),
        (0.04, 0.05), (-0.04, 0.05), (-0.04, -0.30), (-0.15, -0.30),
    ],
    "skirt": [(-0.175, -0.175), (0.175, -0.175), (0.10, 0.175), (-0.10, 0.175)],
}

CATEGORY_ANCHORS: dict[str, dict[str, tuple[float, float]]] = {
    "towel": {
        "corner_top_left": (-0.15, 0.15),
        "corner_top_right": (0.15, 0.15),
        "corner_bottom_left": (-0.15, -0.15),
        "corner_bottom_right": (0.15, -0.15),
    },
    "tshirt": {
        "collar": (0.0, 0.25),
        "left_shoulder": (-0.18, 0.25),
        "right_shoulder": (0.18, 0.25),
        "left_sleeve": (-0.30, 0.175),
        "right_sleeve": (0.30, 0.175),
        "left_hem": (-0.18, -0.25),
        "right_hem": (0.18, -0.25),
    },
    "trousers": {
        "left_waist": (-0.15, 0.30),
        "right_waist": (0.15, 0.30),
        "left_leg": (-0.10, -0.30),
        "right_leg": (0.10, -0.30),
    },
    "skirt": {
        "left_waist": (-0.10, 0.175),
        "right_waist": (0.10, 0.175),
        "left_hem": (-0.175, -0.175),
        "right_hem": (0.175, -0.175),
    },
}

DEFAULT_GRID_SPACING = 0.025

STRUCTURAL, SHEAR, BEND = 0, 1, 2


def points_in_polygon(points: np.ndarray, polygon: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Even-odd containment test, counting boundary points as inside."""
    x, y = points[:, 0], points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    boundary = np.zeros(len(points), dtype=bool)
    n = len(polygon)
    for k in range(n):
        x1, y1 = polygon[k]
        x2, y2 = polygon[(k + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (y - y1) * (x2 - x1) / (y2 - y1) if y2 != y1 else np.full_like(y, np.inf)
        inside ^= crosses & (x < x_at)
        # distance from point to the segment
        ex, ey = x2 - x1, y2 - y1
        seg_len2 = ex * ex + ey * ey
        t = np.clip(((x - x1) * ex + (y - y1) * ey) / max(seg_len2, 1e-30), 0.0, 1.0)
        d2 = (x - (x1 + t * ex)) ** 2 + (y - (y1 + t * ey)) ** 2
        boundary |= d2 <= tol * tol
    return inside | boundary


@dataclass
class ClothTemplate:
    """Compiled garment template: outline plus its sampled particle mesh."""

    category: str
    outline: np.ndarray                  # (P, 2) polygon, meters
    grid_spacing: float
    anchor_vertices: dict[str, int]      # descriptor -> vertex index
    vertices: np.ndarray = field(repr=False, default=None)   # (N, 2) local coords
    triangles: np.ndarray = field(repr=False, default=None)  # (M, 3) vertex indices
    edges: np.ndarray = field(repr=False, default=None)      # (E, 2) spring endpoints
    edge_kinds: np.ndarray = field(repr=False, default=None) # (E,) STRUCTURAL/SHEAR/BEND

    @property
    def n_particles(self) -> int:
        return len(self.vertices)


def build_template(category: str, grid_spacing: float = DEFAULT_GRID_SPACING) -> ClothTemplate:
    if grid_spacing <= 0:
        raise InvalidTemplate(f"grid_spacing must be positive, got {grid_spacing}")
    if category not in CATEGORY_OUTLINES:
        raise InvalidTemplate(f"unknown category {category!r}")
    outline = np.asarray(CATEGORY_OUTLINES[category], dtype=float)
    vocab = vocabulary_for(category)

    xmin, ymin = outline.min(axis=0)
    xmax, ymax = outline.max(axis=0)
    nx = int(np.floor((xmax - xmin) / grid_spacing + 1e-9)) + 1
    ny = int(np.floor((ymax - ymin) / grid_spacing + 1e-9)) + 1
    xs = xmin + np.arange(nx) * grid_spacing
    ys = ymin + np.arange(ny) * grid_spacing
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    grid_pts = np.column_stack([gx.ravel(), gy.ravel()])

    keep = points_in_polygon(grid_pts, outline)
    index = -np.ones(nx * ny, dtype=np.int64)
    index[keep] = np.arange(keep.sum())
    vertices = grid_pts[keep]
    if len(vertices) < 4:
        raise InvalidTemplate(f"{category}: grid spacing {grid_spacing} too coarse")

    def vid(ix: int, iy: int) -> int:
        if 0 <= ix < nx and 0 <= iy < ny:
            return int(index[iy * nx + ix])
        return -1

    triangles, edges, kinds = [], [], []
    seen = set()

    def add_edge(a: int, b: int, kind: int):
        key = (min(a, b), max(a, b))
        if a >= 0 and b >= 0 and key not in seen:
            seen.add(key)
            edges.append(key)
            kinds.append(kind)

    for iy in range(ny):
        for ix in range(nx):
            v = vid(ix, iy)
            if v < 0:
                continue
            add_edge(v, vid(ix + 1, iy), STRUCTURAL)
            add_edge(v, vid(ix, iy + 1), STRUCTURAL)
            add_edge(v, vid(ix + 1, iy + 1), SHEAR)
            if vid(ix - 1, iy + 1) >= 0:
                add_edge(v, vid(ix - 1, iy + 1), SHEAR)
            add_edge(v, vid(ix + 2, iy), BEND)
            add_edge(v, vid(ix, iy + 2), BEND)
            corners = (v, vid(ix + 1, iy), vid(ix + 1, iy + 1), vid(ix, iy + 1))
            present = [c for c in corners if c >= 0]
            if len(present) == 4:
                triangles.append((corners[0], corners[1], corners[2]))
                triangles.append((corners[0], corners[2], corners[3]))
            elif len(present) == 3:
                triangles.append(tuple(present))

    anchors = {}
    for descriptor in vocab.descriptors:
        target = np.asarray(CATEGORY_ANCHORS[category][descriptor])
        d2 = np.sum((vertices - target) ** 2, axis=1)
        best = int(np.argmin(d2))
        if d2[best] > grid_spacing**2:
            raise InvalidTemplate(
                f"{category}: anchor {descriptor} is {np.sqrt(d2[best]):.3f} m from the grid"
            )
        anchors[descriptor] = best
    if len(set(anchors.values())) != len(anchors):
        raise InvalidTemplate(f"{category}: two descriptors map to the same vertex")
    assert set(anchors) == set(CATEGORY_DESCRIPTORS[category])

    return ClothTemplate(
        category=category,
        outline=outline,
        grid_spacing=grid_spacing,
        anchor_vertices=anchors,
        vertices=vertices,
        triangles=np.asarray(triangles, dtype=np.int64),
        edges=np.asarray(edges, dtype=np.int64),
        edge_kinds=np.asarray(kinds, dtype=np.int64),
    )
