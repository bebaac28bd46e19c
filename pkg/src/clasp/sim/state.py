"""Particle cloth state and rest-state instantiation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import PhysicsConfig
from ..errors import InvalidTemplate, OutOfWorkspace
from .scene import Scene
from .templates import BEND, SHEAR, STRUCTURAL, ClothTemplate


@dataclass
class ClothState:
    """Positions/velocities of the particle mesh plus its spring network.

    Spring arrays are shared (read-only by convention) between successive
    states; positions and velocities are copied on every step.
    """

    positions: np.ndarray                  # (N, 3) meters
    velocities: np.ndarray                 # (N, 3) m/s
    spring_i: np.ndarray                   # (E,)
    spring_j: np.ndarray                   # (E,)
    spring_rest: np.ndarray                # (E,) meters
    spring_k: np.ndarray                   # (E,) N/m
    spring_kind: np.ndarray                # (E,) STRUCTURAL/SHEAR/BEND
    pins: dict[str, int] = field(default_factory=dict)   # gripper_id -> particle
    template: ClothTemplate | None = None

    @property
    def n_particles(self) -> int:
        return len(self.positions)

    def copy(self) -> "ClothState":
        return ClothState(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            spring_i=self.spring_i,
            spring_j=self.spring_j,
            spring_rest=self.spring_rest,
            spring_k=self.spring_k,
            spring_kind=self.spring_kind,
            pins=dict(self.pins),
            template=self.template,
        )

    def max_speed(self) -> float:
        if self.n_particles == 0:
            return 0.0
        return float(np.sqrt((self.velocities**2).sum(axis=1).max()))

    def triangles_xyz(self) -> np.ndarray:
        """(M, 3, 3) triangle vertex positions from the template topology."""
        if self.template is None or len(self.template.triangles) == 0:
            return np.zeros((0, 3, 3))
        return self.positions[self.template.triangles]


def instantiate_cloth(
    template: ClothTemplate,
    dims: float | tuple[float, float] = 1.0,
    pose: tuple[float, float, float] = (0.0, 0.0, 0.0),
    seed: int = 0,
    physics: PhysicsConfig | None = None,
    scene: Scene | None = None,
) -> ClothState:
    """Place a rest-state cloth in the workspace.

    dims scales the template outline (scalar or per-axis); pose is
    (rotation_rad, tx, ty). The result is flat on the table with every
    spring at rest length. The seed is accepted for interface stability;
    instantiation itself is deterministic and draws no randomness.
    """
    del seed
    physics = physics or PhysicsConfig()
    scene = scene or Scene()
    sx, sy = (dims, dims) if np.isscalar(dims) else dims
    if sx <= 0 or sy <= 0:
        raise InvalidTemplate(f"scale factors must be positive, got {(sx, sy)}")

    theta, tx, ty = pose
    local = template.vertices * np.array([sx, sy])
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    xy = local @ rot.T + np.array([tx, ty])

    h = scene.half_extent
    if np.any(np.abs(xy) > h):
        raise OutOfWorkspace(
            f"cloth extends outside the {scene.workspace_extent} m workspace"
        )

    positions = np.column_stack([xy, np.zeros(len(xy))])
    i, j = template.edges[:, 0], template.edges[:, 1]
    rest = np.linalg.norm(positions[i] - positions[j], axis=1)
    k_by_kind = {
        STRUCTURAL: physics.stiffness_structural,
        SHEAR: physics.stiffness_shear,
        BEND: physics.stiffness_bend,
    }
    stiff = np.array([k_by_kind[int(k)] for k in template.edge_kinds])
    return ClothState(
        positions=positions,
        velocities=np.zeros_like(positions),
        spring_i=i.copy(),
        spring_j=j.copy(),
        spring_rest=rest,
        spring_k=stiff,
        spring_kind=template.edge_kinds.copy(),
        template=template,
    )
