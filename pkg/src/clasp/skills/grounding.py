"""Resolving sub-task contact descriptors to world positions."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from ..config import SkillsConfig
from ..errors import GroundingFailed
from ..percept import SemanticKeypointSet
from ..planlang import Descriptor, Offset, Receptacle, SubTask
from ..sim.camera import OrthoCamera
from ..sim.state import ClothState

ARMS = ("left", "right")
HOME_POSE = {
    "left": np.array([-0.35, -0.42, 0.12]),
    "right": np.array([0.35, -0.42, 0.12]),
}


@dataclass
class GripperState:
    position: np.ndarray
    closed: bool = False

    def copy(self) -> "GripperState":
        return GripperState(self.position.copy(), self.closed)


@dataclass
class WorldState:
    """Cloth plus both grippers; carried across sub-tasks within a trial."""

    cloth: ClothState
    grippers: dict[str, GripperState] = field(default_factory=lambda: {
        arm: GripperState(HOME_POSE[arm].copy()) for arm in ARMS
    })
    grasp_order: list[str] = field(default_factory=list)

    def copy(self) -> "WorldState":
        return WorldState(
            cloth=self.cloth.copy(),
            grippers={a: g.copy() for a, g in self.grippers.items()},
            grasp_order=list(self.grasp_order),
        )

    def free_arms(self) -> list[str]:
        return [a for a in ARMS if not self.grippers[a].closed]


@dataclass
class ArmTarget:
    arm: str
    descriptor: str | None = None
    point: np.ndarray | None = None      # world meters
    receptacle: str | None = None


@dataclass
class Grounding:
    subtask: SubTask
    targets: list[ArmTarget] = field(default_factory=list)


def _resolve_point(
    descriptor: str,
    kps: SemanticKeypointSet,
    camera: OrthoCamera,
    depth: np.ndarray,
    min_confidence: float,
) -> np.ndarray:
    try:
        kp = kps.get(descriptor)
    except Exception:
        raise GroundingFailed(descriptor, "not among detected keypoints") from None
    if kp.confidence < min_confidence:
        raise GroundingFailed(descriptor, f"confidence {kp.confidence:.2f} below {min_confidence}")
    x, y = camera.pixel_to_world(kp.row, kp.col)
    z = float(depth[kp.row, kp.col])
    return np.array([x, y, z])


def _assign_arms(contacts: list[np.ndarray], arms: list[str], world: WorldState) -> list[str]:
    """Pick the arm-to-contact pairing with minimal total travel; ties by arm order."""
    if len(contacts) > len(arms):
        raise GroundingFailed("grasp", f"need {len(contacts)} free grippers, have {len(arms)}")
    best = None
    for perm in permutations(arms, len(contacts)):
        cost = sum(
            float(np.linalg.norm(world.grippers[a].position[:2] - c[:2]))
            for a, c in zip(perm, contacts)
        )
        key = (round(cost, 12), perm)
        if best is None or key < best[0]:
            best = (key, perm)
    return list(best[1])


def ground_contacts(
    subtask: SubTask,
    kps: SemanticKeypointSet,
    camera: OrthoCamera,
    depth: np.ndarray,
    world: WorldState,
    cfg: SkillsConfig = SkillsConfig(),
) -> Grounding:
    """Resolve the sub-task's arguments to per-arm world targets.

    Descriptor pixels map to world (x, y) through the inverse camera;
    z comes from the depth image at that pixel. Offsets shift the resolved
    point in the table plane. Receptacle targets stay symbolic here; the
    trajectory compiler resolves them against the scene.
    """
    prim = subtask.primitive
    targets: list[ArmTarget] = []

    if prim in ("grasp", "press"):
        contacts, names = [], []
        seen_pixels = set()
        for arg in subtask.args:
            assert isinstance(arg, Descriptor)
            kp = None
            point = _resolve_point(arg.name, kps, camera, depth, cfg.min_confidence)
            kp = kps.get(arg.name)
            if (kp.row, kp.col) in seen_pixels:
                raise GroundingFailed(arg.name, "degenerate: identical pixels for both arms")
            seen_pixels.add((kp.row, kp.col))
            contacts.append(point)
            names.append(arg.name)
        arms = world.free_arms() if prim == "grasp" else (world.free_arms() or list(ARMS))
        assigned = _assign_arms(contacts, arms, world)
        for arm, name, point in zip(assigned, names, contacts):
            targets.append(ArmTarget(arm=arm, descriptor=name, point=point))

    elif prim == "moveto":
        active = list(world.grasp_order)
        if len(subtask.args) != len(active):
            raise GroundingFailed("moveto", f"{len(active)} active grasps, {len(subtask.args)} targets")
        for arm, arg in zip(active, subtask.args):
            if isinstance(arg, Receptacle):
                targets.append(ArmTarget(arm=arm, receptacle=arg.kind))
            elif isinstance(arg, Offset):
                point = _resolve_point(arg.descriptor, kps, camera, depth, cfg.min_confidence)
                point = point + np.array([arg.dx, arg.dy, 0.0])
                targets.append(ArmTarget(arm=arm, descriptor=arg.descriptor, point=point))
            else:
                assert isinstance(arg, Descriptor)
                point = _resolve_point(arg.name, kps, camera, depth, cfg.min_confidence)
                targets.append(ArmTarget(arm=arm, descriptor=arg.name, point=point))

    else:
        # release / rotate / pull operate on the currently grasping arms
        for arm in world.grasp_order:
            targets.append(ArmTarget(arm=arm))

    return Grounding(subtask=subtask, targets=targets)
