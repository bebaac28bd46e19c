"""Compiling grounded sub-tasks into tick-synchronized gripper trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import SkillsConfig
from ..errors import DegenerateGrasp, Unreachable
from ..planlang import Angle, AlignTo, SubTask
from ..sim.scene import Scene
from .grounding import ARMS, Grounding, WorldState


@dataclass
class Waypoint:
    t: float
    position: np.ndarray
    closed: bool


@dataclass
class Trajectory:
    """Per-gripper waypoints on a shared control-tick timeline.

    Arms without waypoints hold their pose. Waypoint k of every listed arm
    shares timestamp (k+1) * tick; consecutive positions never exceed
    max_speed * tick apart.
    """

    waypoints: dict[str, list[Waypoint]] = field(default_factory=dict)
    tick: float = 0.02

    @property
    def n_ticks(self) -> int:
        return max((len(w) for w in self.waypoints.values()), default=0)

    def arms(self) -> list[str]:
        return sorted(self.waypoints)


class _Builder:
    def __init__(self, world: WorldState, cfg: SkillsConfig):
        self.cfg = cfg
        self.pos = {a: world.grippers[a].position.copy() for a in ARMS}
        self.closed = {a: world.grippers[a].closed for a in ARMS}
        self.moving_arms: set[str] = set()
        self.rows: list[dict[str, tuple[np.ndarray, bool]]] = []

    def phase(self, goals: dict[str, np.ndarray], closed: dict[str, bool] | None = None,
              min_ticks: int = 1) -> None:
        """Move the listed arms linearly to their goals in lockstep."""
        closed = closed or {}
        step_limit = self.cfg.max_speed * self.cfg.control_tick
        dists = [np.linalg.norm(goals[a] - self.pos[a]) for a in goals]
        n = max(int(np.ceil(max(dists, default=0.0) / step_limit)), min_ticks)
        starts = {a: self.pos[a].copy() for a in goals}
        for s in range(1, n + 1):
            row = {}
            for a, goal in goals.items():
                p = starts[a] + (goal - starts[a]) * (s / n)
                flag = closed.get(a, self.closed[a])
                row[a] = (p, flag)
            self.rows.append(row)
        for a, goal in goals.items():
            self.pos[a] = goal.copy()
            if a in closed:
                self.closed[a] = closed[a]
            self.moving_arms.add(a)

    def arc(self, arms: list[str], theta: float) -> None:
        """Rotate the arms about their midpoint's vertical axis by theta."""
        if not arms:
            return
        mid = np.mean([self.pos[a] for a in arms], axis=0)
        radius = max(float(np.linalg.norm((self.pos[a] - mid)[:2])) for a in arms)
        step_limit = self.cfg.max_speed * self.cfg.control_tick
        n = max(int(np.ceil(abs(theta) * max(radius, 1e-9) / step_limit)), 1)
        starts = {a: self.pos[a].copy() for a in arms}
        for s in range(1, n + 1):
            ang = theta * s / n
            c, si = np.cos(ang), np.sin(ang)
            row = {}
            for a in arms:
                rel = starts[a] - mid
                rot = np.array([c * rel[0] - si * rel[1], si * rel[0] + c * rel[1], rel[2]])
                row[a] = (mid + rot, self.closed[a])
            self.rows.append(row)
        for a in arms:
            rel = starts[a] - mid
            c, si = np.cos(theta), np.sin(theta)
            self.pos[a] = mid + np.array([c * rel[0] - si * rel[1], si * rel[0] + c * rel[1], rel[2]])
            self.moving_arms.add(a)

    def build(self, scene: Scene) -> Trajectory:
        tick = self.cfg.control_tick
        traj = Trajectory(waypoints={a: [] for a in sorted(self.moving_arms)}, tick=tick)
        last = {a: None for a in self.moving_arms}
        for k, row in enumerate(self.rows):
            t = (k + 1) * tick
            for a in traj.waypoints:
                if a in row:
                    p, flag = row[a]
                    last[a] = (p, flag)
                elif last[a] is not None:
                    p, flag = last[a]
                else:
                    p, flag = self.pos[a], self.closed[a]
                traj.waypoints[a].append(Waypoint(t=t, position=np.asarray(p, dtype=float), closed=flag))
        self._check(traj, scene)
        return traj

    def _check(self, traj: Trajectory, scene: Scene) -> None:
        h = scene.half_extent
        for arm, wps in traj.waypoints.items():
            for wp in wps:
                x, y, z = wp.position
                if abs(x) > h or abs(y) > h or z < -2 * self.cfg.press_depth or z > scene.workspace_extent:
                    raise Unreachable(f"{arm} waypoint {wp.position} outside the workspace")
        # per-tick inter-arm separation, including a parked arm
        n = traj.n_ticks
        for k in range(n):
            pts = {}
            for arm in ARMS:
                wps = traj.waypoints.get(arm)
                if wps:
                    pts[arm] = wps[min(k, len(wps) - 1)].position
                else:
                    pts[arm] = self.pos[arm]
            d = float(np.linalg.norm(pts["left"] - pts["right"]))
            if d < self.cfg.min_grip_separation:
                raise Unreachable(f"grippers {d * 100:.1f} cm apart at tick {k}; minimum is "
                                  f"{self.cfg.min_grip_separation * 100:.0f} cm")


def _hanger_targets(arms, world, scene, cfg):
    """Carry the grasped edge past the bar so the drape balances when released."""
    bar = scene.hanger
    if bar is None:
        raise Unreachable("moveto(hanger) without a hanger in the scene")
    mid_bar = bar.midpoint
    axis = bar.axis[:2]
    axis = axis / max(np.linalg.norm(axis), 1e-12)
    perp = np.array([-axis[1], axis[0]])
    arm_mid = np.mean([world.grippers[a].position for a in arms], axis=0)
    approach = mid_bar[:2] - arm_mid[:2]
    if perp @ approach < 0:
        perp = -perp
    # overshoot by a bit more than half the hanging extent below the grippers
    cloth_low = float(world.cloth.positions[:, 2].min()) if world.cloth.n_particles else 0.0
    hang = max(arm_mid[2] - cloth_low, 0.0)
    overshoot = 0.55 * hang + 0.02
    z = bar.p0[2] + bar.radius + cfg.place_clearance
    goals = {}
    for a in arms:
        rel = world.grippers[a].position[:2] - arm_mid[:2]
        xy = mid_bar[:2] + perp * overshoot + rel
        goals[a] = np.array([xy[0], xy[1], z])
    return goals, z


def _box_targets(arms, world, scene, cfg):
    """Translate the grasped edge so its midpoint lands over the box center."""
    box = scene.box
    if box is None:
        raise Unreachable("moveto(box) without a box in the scene")
    arm_mid = np.mean([world.grippers[a].position for a in arms], axis=0)
    z = box.rim_height + cfg.place_clearance
    goals = {}
    for a in arms:
        rel = world.grippers[a].position[:2] - arm_mid[:2]
        xy = box.center + rel
        goals[a] = np.array([xy[0], xy[1], z])
    transport_z = box.rim_height + cfg.receptacle_clearance
    return goals, transport_z


def compile_subtask(
    subtask: SubTask,
    grounding: Grounding,
    scene: Scene,
    world: WorldState,
    cfg: SkillsConfig = SkillsConfig(),
) -> Trajectory:
    """Pure compilation of one grounded sub-task into a trajectory."""
    b = _Builder(world, cfg)
    prim = subtask.primitive

    if prim == "grasp":
        approach = {t.arm: t.point + np.array([0, 0, cfg.approach_clearance]) for t in grounding.targets}
        contact = {t.arm: t.point.copy() for t in grounding.targets}
        lift = {t.arm: t.point + np.array([0, 0, cfg.approach_clearance]) for t in grounding.targets}
        b.phase(approach)
        b.phase(contact)
        b.phase({a: contact[a] for a in contact}, closed={a: True for a in contact}, min_ticks=1)
        b.phase(lift)

    elif prim == "moveto":
        arms = [t.arm for t in grounding.targets]
        receptacles = {t.receptacle for t in grounding.targets if t.receptacle}
        if receptacles == {"hanger"}:
            goals, transport_z = _hanger_targets(arms, world, scene, cfg)
        elif receptacles == {"box"}:
            goals, transport_z = _box_targets(arms, world, scene, cfg)
        elif receptacles:
            raise Unreachable("moveto cannot mix receptacle and point targets")
        else:
            goals = {t.arm: t.point + np.array([0, 0, cfg.place_clearance]) for t in grounding.targets}
            transport_z = cfg.transport_height
        lift = {a: np.array([world.grippers[a].position[0], world.grippers[a].position[1],
                             max(transport_z, world.grippers[a].position[2])]) for a in arms}
        b.phase(lift)
        travel = {a: np.array([goals[a][0], goals[a][1], lift[a][2]]) for a in arms}
        b.phase(travel)
        b.phase(goals)

    elif prim == "press":
        for t in grounding.targets:
            if t.point[2] - cfg.press_depth < -2 * cfg.press_depth:
                raise Unreachable(f"press target below reach at {t.point}")
        above = {t.arm: t.point + np.array([0, 0, cfg.approach_clearance]) for t in grounding.targets}
        down = {t.arm: np.array([t.point[0], t.point[1], t.point[2] - cfg.press_depth])
                for t in grounding.targets}
        b.phase(above)
        b.phase(down)
        b.phase(above)

    elif prim == "release":
        arms = [t.arm for t in grounding.targets] or list(world.grasp_order)
        b.phase({a: world.grippers[a].position.copy() for a in arms},
                closed={a: False for a in arms}, min_ticks=1)

    elif prim == "rotate":
        arms = [t.arm for t in grounding.targets]
        arg = subtask.args[0]
        if isinstance(arg, Angle):
            theta = np.deg2rad(arg.degrees)
        else:
            assert isinstance(arg, AlignTo)
            if scene.hanger is None:
                raise Unreachable("rotate(align(hanger)) without a hanger")
            theta = _align_angle(arms, world, scene)
        b.arc(arms, theta)
        if not b.rows:  # zero rotation still emits one hold waypoint
            b.phase({a: world.grippers[a].position.copy() for a in arms}, min_ticks=1)

    elif prim == "pull":
        arms = list(world.grasp_order)
        p0 = world.grippers[arms[0]].position
        p1 = world.grippers[arms[1]].position
        d = float(np.linalg.norm(p1 - p0))
        if d < 0.01:
            raise DegenerateGrasp(f"grippers only {d * 100:.1f} cm apart; cannot pull")
        axis = (p1 - p0) / d
        half = 0.5 * cfg.pull_fraction * d
        b.phase({arms[0]: p0 - axis * half, arms[1]: p1 + axis * half})

    else:
        raise Unreachable(f"unknown primitive {prim!r}")

    return b.build(scene)


def _align_angle(arms: list[str], world: WorldState, scene: Scene) -> float:
    """Minimal rotation aligning the grasp line with the bar axis."""
    if len(arms) < 2:
        return 0.0
    g = world.grippers[arms[1]].position[:2] - world.grippers[arms[0]].position[:2]
    norm = float(np.linalg.norm(g))
    if norm < 1e-9:
        return 0.0
    g = g / norm
    bar = scene.hanger.axis[:2]
    bar = bar / max(np.linalg.norm(bar), 1e-12)
    theta = float(np.arctan2(g[0] * bar[1] - g[1] * bar[0], g @ bar))
    if theta > np.pi / 2:
        theta -= np.pi
    elif theta < -np.pi / 2:
        theta += np.pi
    return theta


def check_speed_bound(traj: Trajectory, world: WorldState, cfg: SkillsConfig) -> float:
    """Largest per-tick displacement across all arms (test helper)."""
    worst = 0.0
    for arm, wps in traj.waypoints.items():
        prev = world.grippers[arm].position
        for wp in wps:
            worst = max(worst, float(np.linalg.norm(wp.position - prev)))
            prev = wp.position
    return worst
