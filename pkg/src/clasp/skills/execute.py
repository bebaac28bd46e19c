"""Closed ticking of the simulator under a compiled trajectory."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import BenchConfig, PhysicsConfig
from ..sim import GripperCommand, Scene, coverage
from ..sim.dynamics import settle, step
from .grounding import WorldState
from .trajectory import Trajectory


@dataclass
class ExecutionLog:
    entries: list[dict] = field(default_factory=list)
    events: list[str] = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True) for e in self.entries) + ("\n" if self.entries else "")

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())


def _grasp_nearest(world: WorldState, arm: str, radius: float) -> bool:
    pos = world.grippers[arm].position
    cloth = world.cloth
    if cloth.n_particles == 0:
        return False
    d2 = ((cloth.positions - pos) ** 2).sum(axis=1)
    best = int(np.argmin(d2))
    if d2[best] > radius * radius:
        return False
    taken = set(cloth.pins.values())
    if best in taken:
        order = np.argsort(d2)
        for cand in order:
            if d2[cand] > radius * radius:
                return False
            if int(cand) not in taken:
                best = int(cand)
                break
        else:
            return False
    cloth.pins[arm] = best
    return True


def execute(
    trajectory: Trajectory,
    world: WorldState,
    scene: Scene,
    physics: PhysicsConfig = PhysicsConfig(),
    bench: BenchConfig = BenchConfig(),
    log: ExecutionLog | None = None,
) -> tuple[WorldState, ExecutionLog]:
    """Run one sub-task trajectory to completion, then settle the cloth.

    Grippers advance in lockstep at the control tick; closed/open edges
    create and remove pins. A close with no particle within grasp range is
    logged as a missed grasp and execution continues.
    """
    log = log if log is not None else ExecutionLog()
    world = world.copy()
    n_ticks = trajectory.n_ticks
    substeps = physics.substeps_per_tick
    stride = max(bench.coverage_log_stride, 1)

    for k in range(n_ticks):
        targets = {}
        for arm, wps in trajectory.waypoints.items():
            wp = wps[min(k, len(wps) - 1)]
            g = world.grippers[arm]
            if wp.closed and not g.closed:
                g.closed = True
                if not _grasp_nearest(world, arm, physics.grasp_radius):
                    log.events.append(f"GraspMissed:{arm}:tick{k}")
            elif not wp.closed and g.closed:
                g.closed = False
                world.cloth.pins.pop(arm, None)
            targets[arm] = (g.position.copy(), wp.position.copy(), wp.closed)
            g.position = wp.position.copy()

        for s in range(1, substeps + 1):
            cmds = []
            for arm, (start, goal, closed) in targets.items():
                sub_target = start + (goal - start) * (s / substeps)
                cmds.append(GripperCommand(arm, sub_target, closed))
            world.cloth = step(world.cloth, scene, cmds, physics.dt, physics)

        entry = {
            "tick": k,
            "time": round((k + 1) * trajectory.tick, 6),
            "grippers": {
                arm: {
                    "position": [round(float(v), 6) for v in world.grippers[arm].position],
                    "closed": world.grippers[arm].closed,
                    "pinned": arm in world.cloth.pins,
                }
                for arm in sorted(world.grippers)
            },
        }
        if k % stride == 0 or k == n_ticks - 1:
            entry["coverage"] = round(coverage(world.cloth), 6)
        log.entries.append(entry)

    hold = [
        GripperCommand(arm, world.grippers[arm].position, world.grippers[arm].closed)
        for arm in sorted(world.grippers)
        if world.grippers[arm].closed
    ]
    world.cloth = settle(world.cloth, scene, physics, commands=hold,
                         max_steps=physics.settle_max_steps)
    return world, log
