"""Scene description: table, optional hanger bar and box, gravity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidParameter


@dataclass
class HangerBar:
    """Horizontal cylindrical bar, e.g. a clothes rail."""

    p0: np.ndarray
    p1: np.ndarray
    radius: float = 0.01

    def __post_init__(self):
        self.p0 = np.asarray(self.p0, dtype=float)
        self.p1 = np.asarray(self.p1, dtype=float)
        if min(self.p0[2], self.p1[2]) <= 0:
            raise InvalidParameter("hanger bar must sit above the table")

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.p0 + self.p1)

    @property
    def axis(self) -> np.ndarray:
        d = self.p1 - self.p0
        return d / np.linalg.norm(d)


@dataclass
class Box:
    """Open box: axis-aligned footprint on the table plus a rim height."""

    center: np.ndarray
    size: np.ndarray        # (width_x, width_y)
    rim_height: float = 0.08
    wall_margin: float = 0.005

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.size = np.asarray(self.size, dtype=float)
        if self.rim_height <= 0:
            raise InvalidParameter("box rim height must be positive")

    @property
    def lo(self) -> np.ndarray:
        return self.center - 0.5 * self.size

    @property
    def hi(self) -> np.ndarray:
        return self.center + 0.5 * self.size

    def contains_xy(self, xy: np.ndarray) -> np.ndarray:
        lo, hi = self.lo, self.hi
        return (
            (xy[:, 0] >= lo[0]) & (xy[:, 0] <= hi[0])
            & (xy[:, 1] >= lo[1]) & (xy[:, 1] <= hi[1])
        )


@dataclass
class Scene:
    gravity: float = 9.81
    hanger: HangerBar | None = None
    box: Box | None = None
    workspace_extent: float = 1.0       # square side, centered at the origin

    @property
    def half_extent(self) -> float:
        return 0.5 * self.workspace_extent

    def in_workspace(self, point: np.ndarray) -> bool:
        h = self.half_extent
        return bool(
            -h <= point[0] <= h and -h <= point[1] <= h and 0.0 <= point[2] <= self.workspace_extent
        )


@dataclass
class GripperCommand:
    gripper_id: str          # "left" | "right"
    target: np.ndarray
    closed: bool

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=float)


def default_scene(hanger: bool = False, box: bool = False) -> Scene:
    """Standard desk scene; receptacle poses are ground truth, not perceived."""
    bar = HangerBar(p0=(-0.20, 0.25, 0.30), p1=(0.20, 0.25, 0.30)) if hanger else None
    bin_ = Box(center=(0.25, -0.25), size=(0.40, 0.40), rim_height=0.08) if box else None
    return Scene(hanger=bar, box=bin_)
