"""Deterministic rule-based planner.

Encodes one manipulation strategy per task family as plan text over the
category's descriptors; the LLM planner is expected to produce plans of the
same shape. Every plan this module emits validates against its vocabulary.
"""

from __future__ import annotations

import numpy as np

from ..errors import UnsupportedTask
from ..percept import Keypoint, SemanticKeypointSet
from ..planlang import Plan, parse_plan
from .task import TaskSpec

# Moving-edge -> landing-edge descriptor pairs per fold direction.
FOLD_EDGES: dict[str, dict[str, tuple[tuple[str, str], tuple[str, str]]]] = {
    "towel": {
        "left_to_right": (("corner_top_left", "corner_bottom_left"),
                          ("corner_top_right", "corner_bottom_right")),
        "right_to_left": (("corner_top_right", "corner_bottom_right"),
                          ("corner_top_left", "corner_bottom_left")),
        "top_to_bottom": (("corner_top_left", "corner_top_right"),
                          ("corner_bottom_left", "corner_bottom_right")),
        "bottom_to_top": (("corner_bottom_left", "corner_bottom_right"),
                          ("corner_top_left", "corner_top_right")),
    },
    "tshirt": {
        "left_to_right": (("left_sleeve", "left_hem"), ("right_sleeve", "right_hem")),
        "right_to_left": (("right_sleeve", "right_hem"), ("left_sleeve", "left_hem")),
        "top_to_bottom": (("left_shoulder", "right_shoulder"), ("left_hem", "right_hem")),
        "bottom_to_top": (("left_hem", "right_hem"), ("left_shoulder", "right_shoulder")),
    },
    "trousers": {
        "left_to_right": (("left_waist", "left_leg"), ("right_waist", "right_leg")),
        "right_to_left": (("right_waist", "right_leg"), ("left_waist", "left_leg")),
        "top_to_bottom": (("left_waist", "right_waist"), ("left_leg", "right_leg")),
        "bottom_to_top": (("left_leg", "right_leg"), ("left_waist", "right_waist")),
    },
    "skirt": {
        "left_to_right": (("left_waist", "left_hem"), ("right_waist", "right_hem")),
        "right_to_left": (("right_waist", "right_hem"), ("left_waist", "left_hem")),
        "top_to_bottom": (("left_waist", "right_waist"), ("left_hem", "right_hem")),
        "bottom_to_top": (("left_hem", "right_hem"), ("left_waist", "right_waist")),
    },
}

# Preferred two-arm carry pair (the garment's top edge) per category.
CARRY_PAIR: dict[str, tuple[str, str]] = {
    "towel": ("corner_top_left", "corner_top_right"),
    "tshirt": ("left_shoulder", "right_shoulder"),
    "trousers": ("left_waist", "right_waist"),
    "skirt": ("left_waist", "right_waist"),
}


def _xy(kp: Keypoint, mpp: float = 1.0 / 224, extent: float = 1.0) -> np.ndarray:
    if kp.world is not None:
        return np.asarray(kp.world[:2], dtype=float)
    return np.array([kp.col * mpp - 0.5 * extent, kp.row * mpp - 0.5 * extent])


def _axis_of(direction: str) -> int:
    return 0 if direction in ("left_to_right", "right_to_left") else 1


def _cm(v: float) -> float:
    return round(v, 2)


def _fold_lines(spec: TaskSpec, kps: SemanticKeypointSet) -> list[str]:
    moving, targets = FOLD_EDGES[spec.category][spec.fold_direction]
    axis = _axis_of(spec.fold_direction)
    pts = {kp.descriptor: _xy(kp) for kp in kps.keypoints}
    coords = np.array([p[axis] for p in pts.values()])
    lo, hi = coords.min(), coords.max()
    extent = hi - lo
    positive = spec.fold_direction in ("left_to_right", "bottom_to_top")

    lines = [f'grasp("{moving[0]}", "{moving[1]}")']
    if spec.fold_fraction == 0.5:
        lines.append(f'moveto("{targets[0]}", "{targets[1]}")')
        press_pair = targets
    else:
        # reflect the moving edge across the fold line at `fraction` of the extent
        line = (lo + spec.fold_fraction * extent) if positive else (hi - spec.fold_fraction * extent)
        offs = []
        for d in moving:
            delta = 2.0 * (line - pts[d][axis])
            dx, dy = (delta, 0.0) if axis == 0 else (0.0, delta)
            offs.append(f'offset("{d}", {_cm(dx):.2f}, {_cm(dy):.2f})')
        lines.append(f"moveto({offs[0]}, {offs[1]})")
        press_pair = moving
    lines.append("release()")
    lines.append(f'press("{press_pair[0]}", "{press_pair[1]}")')

    if spec.fold_times == 2:
        # second fold, reversed direction: the stacked former moving edge is
        # carried back to the crease (half the folded extent)
        delta = -extent / 2.0 if positive else extent / 2.0
        dx, dy = (delta, 0.0) if axis == 0 else (0.0, delta)
        offs = [f'offset("{d}", {_cm(dx):.2f}, {_cm(dy):.2f})' for d in moving]
        lines += [
            f'grasp("{moving[0]}", "{moving[1]}")',
            f"moveto({offs[0]}, {offs[1]})",
            "release()",
            f'press("{moving[0]}", "{moving[1]}")',
        ]
    return lines


def _flatten_lines(spec: TaskSpec, kps: SemanticKeypointSet) -> list[str]:
    pts = [(kp.descriptor, _xy(kp)) for kp in kps.keypoints]
    pairs = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dist = float(np.linalg.norm(pts[i][1] - pts[j][1]))
            pairs.append((dist, pts[i][0], pts[j][0]))
    pairs.sort(key=lambda p: (-p[0], p[1], p[2]))
    first = pairs[0]
    disjoint = next((p for p in pairs[1:] if {p[1], p[2]}.isdisjoint({first[1], first[2]})), pairs[1])
    rounds = [first, disjoint, first]
    lines = []
    for _, a, b in rounds:
        lines += [f'grasp("{a}", "{b}")', "pull()", "release()"]
    return lines


def _hang_lines(spec: TaskSpec, kps: SemanticKeypointSet) -> list[str]:
    a, b = CARRY_PAIR[spec.category]
    mid = 0.5 * (_xy(kps.get(a)) + _xy(kps.get(b)))
    dx, dy = _cm(-mid[0]), _cm(-mid[1])
    return [
        f'grasp("{a}", "{b}")',
        f'moveto(offset("{a}", {dx:.2f}, {dy:.2f}), offset("{b}", {dx:.2f}, {dy:.2f}))',
        "rotate(align(hanger))",
        "moveto(hanger, hanger)",
        "release()",
    ]


def _place_lines(spec: TaskSpec, kps: SemanticKeypointSet) -> list[str]:
    a, b = CARRY_PAIR[spec.category]
    return [f'grasp("{a}", "{b}")', "moveto(box, box)", "release()"]


def template_plan(spec: TaskSpec, kps: SemanticKeypointSet) -> Plan:
    """Rule-generated plan; provenance 'template'; always validates."""
    if spec.category != kps.category:
        raise UnsupportedTask(f"task is for {spec.category}, keypoints are {kps.category}")
    builders = {
        "folding": _fold_lines,
        "flattening": _flatten_lines,
        "hanging": _hang_lines,
        "placing": _place_lines,
    }
    if spec.family not in builders:
        raise UnsupportedTask(f"no template strategy for family {spec.family!r}")
    if spec.family == "folding" and spec.fold_direction not in FOLD_EDGES.get(spec.category, {}):
        raise UnsupportedTask(f"no fold rule for {spec.category}/{spec.fold_direction}")
    text = "\n".join(builders[spec.family](spec, kps)) + "\n"
    plan = parse_plan(text, provenance="template")
    return plan
