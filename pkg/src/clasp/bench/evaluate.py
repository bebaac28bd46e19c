"""Per-family success evaluation.

Folding is scored against a geometric reflection oracle applied to the flat
rest state; flattening against the flat coverage; hanging and placing by
geometric predicates on the settled particle cloud.
"""

from __future__ import annotations

import numpy as np

from ..config import BenchConfig
from ..errors import InvalidSpec
from ..planner.task import TaskSpec
from ..sim import Scene, coverage
from ..sim.state import ClothState

_AXIS = {"left_to_right": 0, "right_to_left": 0, "top_to_bottom": 1, "bottom_to_top": 1}
_POSITIVE = {"left_to_right": True, "bottom_to_top": True,
             "right_to_left": False, "top_to_bottom": False}
_REVERSE = {
    "left_to_right": "right_to_left", "right_to_left": "left_to_right",
    "top_to_bottom": "bottom_to_top", "bottom_to_top": "top_to_bottom",
}


def reflect_across_line(points: np.ndarray, axis: int, line: float) -> np.ndarray:
    """Mirror the given coordinate across `line`; an involution."""
    out = points.copy()
    out[:, axis] = 2.0 * line - out[:, axis]
    return out


def fold_step(points: np.ndarray, direction: str, fraction: float) -> np.ndarray:
    """Reflect the moving side of the cloud across the fold line."""
    axis = _AXIS[direction]
    lo = points[:, axis].min()
    hi = points[:, axis].max()
    extent = hi - lo
    if _POSITIVE[direction]:
        line = lo + fraction * extent
        moving = points[:, axis] < line
    else:
        line = hi - fraction * extent
        moving = points[:, axis] > line
    out = points.copy()
    out[moving, axis] = 2.0 * line - out[moving, axis]
    return out


def fold_target(flat_positions: np.ndarray, spec: TaskSpec) -> np.ndarray:
    """Target configuration for a folding task: sequential reflections of
    the flat state; a second fold runs in the reversed direction at 1/2."""
    target = flat_positions.copy()
    target[:, 2] = 0.0
    target = fold_step(target, spec.fold_direction, spec.fold_fraction)
    if spec.fold_times == 2:
        target = fold_step(target, _REVERSE[spec.fold_direction], 0.5)
    return target


def evaluate_success(
    spec: TaskSpec,
    final: ClothState,
    flat_positions: np.ndarray,
    flat_coverage: float,
    scene: Scene,
    cfg: BenchConfig = BenchConfig(),
) -> tuple[bool, float]:
    """(success, score); the score is computed even when the trial failed.

    Scores: folding = mean particle distance to the fold target (m);
    flattening = coverage ratio vs flat; hanging and placing = fraction of
    their geometric subcriteria satisfied (success iff all of them).
    """
    pos = final.positions

    if spec.family == "folding":
        target = fold_target(flat_positions, spec)
        score = float(np.linalg.norm(pos - target, axis=1).mean())
        span = flat_positions[:, :2].max(axis=0) - flat_positions[:, :2].min(axis=0)
        diag = float(np.linalg.norm(span))
        return score <= cfg.fold_tolerance * diag, score

    if spec.family == "flattening":
        ratio = coverage(final) / max(flat_coverage, 1e-12)
        return ratio >= cfg.flatten_coverage, float(ratio)

    if spec.family == "hanging":
        bar = scene.hanger
        if bar is None:
            raise InvalidSpec("hanging evaluation requires a hanger in the scene")
        clear_ground = pos[:, 2].min() >= cfg.hang_clearance
        axis = bar.p1 - bar.p0
        t = np.clip((pos - bar.p0) @ axis / float(axis @ axis), 0.0, 1.0)
        closest = bar.p0 + t[:, None] * axis
        dist_to_surface = np.linalg.norm(pos - closest, axis=1) - bar.radius
        on_bar = bool((dist_to_surface <= cfg.hang_bar_distance).any())
        # particles on both sides of the bar's vertical plane
        axis_xy = axis[:2] / max(np.linalg.norm(axis[:2]), 1e-12)
        normal = np.array([-axis_xy[1], axis_xy[0]])
        side = (pos[:, :2] - bar.midpoint[:2]) @ normal
        both_sides = bool((side > 1e-6).any() and (side < -1e-6).any())
        met = [clear_ground, on_bar, both_sides]
        score = sum(met) / 3.0
        return all(met), float(score)

    if spec.family == "placing":
        box = scene.box
        if box is None:
            raise InvalidSpec("placing evaluation requires a box in the scene")
        inside = box.contains_xy(pos[:, :2])
        contained = float(inside.mean()) >= cfg.place_containment
        below_rim = bool(pos[:, 2].max() <= box.rim_height)
        flat_enough = coverage(final) >= cfg.place_coverage * flat_coverage
        met = [contained, below_rim, flat_enough]
        score = sum(met) / 3.0
        return all(met), float(score)

    raise InvalidSpec(f"unknown family {spec.family!r}")
