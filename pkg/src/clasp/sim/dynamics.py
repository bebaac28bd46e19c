"""Semi-implicit Euler cloth dynamics with projection-based collisions."""

from __future__ import annotations

import numpy as np

from ..config import PhysicsConfig
from ..errors import InvalidParameter, NumericalDivergence, SettleTimeout
from .scene import GripperCommand, Scene
from .state import ClothState

_DEFAULT = PhysicsConfig()


def _spring_forces(state: ClothState) -> np.ndarray:
    forces = np.zeros_like(state.positions)
    if len(state.spring_i) == 0:
        return forces
    delta = state.positions[state.spring_j] - state.positions[state.spring_i]
    length = np.linalg.norm(delta, axis=1)
    safe = np.maximum(length, 1e-12)
    f = (state.spring_k * (length - state.spring_rest) / safe)[:, None] * delta
    np.add.at(forces, state.spring_i, f)
    np.add.at(forces, state.spring_j, -f)
    return forces


def _bar_project(positions: np.ndarray, velocities: np.ndarray, scene: Scene) -> None:
    bar = scene.hanger
    if bar is None:
        return
    axis = bar.p1 - bar.p0
    seg_len2 = float(axis @ axis)
    rel = positions - bar.p0
    t = np.clip(rel @ axis / seg_len2, 0.0, 1.0)
    closest = bar.p0 + t[:, None] * axis
    radial = positions - closest
    dist = np.linalg.norm(radial, axis=1)
    hit = dist < bar.radius
    if not np.any(hit):
        return
    safe = np.maximum(dist[hit], 1e-12)[:, None]
    normal = radial[hit] / safe
    positions[hit] = closest[hit] + normal * bar.radius
    # remove the inward velocity component
    vn = np.sum(velocities[hit] * normal, axis=1)
    velocities[hit] -= np.minimum(vn, 0.0)[:, None] * normal


def _box_project(positions: np.ndarray, scene: Scene) -> None:
    """Thin-wall projection: particles straddling a wall plane below the rim
    are pushed back to the side they came from (nearest face)."""
    box = scene.box
    if box is None:
        return
    lo, hi = box.lo, box.hi
    m = box.wall_margin
    below = positions[:, 2] < box.rim_height
    for axis in (0, 1):
        o = 1 - axis
        span = (positions[:, o] >= lo[o] - m) & (positions[:, o] <= hi[o] + m)
        for plane in (lo[axis], hi[axis]):
            near = below & span & (np.abs(positions[:, axis] - plane) < m)
            if not np.any(near):
                continue
            side = np.sign(positions[near, axis] - plane)
            side[side == 0] = 1.0
            positions[near, axis] = plane + side * m


def step(
    state: ClothState,
    scene: Scene,
    commands: list[GripperCommand] | None = None,
    dt: float = _DEFAULT.dt,
    physics: PhysicsConfig = _DEFAULT,
) -> ClothState:
    """One integration substep; pure (returns a new state)."""
    if not (0.0 < dt <= 0.02):
        raise InvalidParameter(f"dt must be in (0, 0.02], got {dt}")
    commands = commands or []
    if len(commands) > 2:
        raise InvalidParameter("at most two gripper commands per step")

    out = state.copy()
    p, v = out.positions, out.velocities
    n = len(p)
    if n == 0:
        return out

    accel = _spring_forces(state) / physics.particle_mass
    accel[:, 2] -= scene.gravity
    v += accel * dt
    v *= 1.0 - physics.damping
    p += v * dt

    # open grippers push cloth down (press behavior); closed grippers pin
    pinned_targets: dict[int, np.ndarray] = {}
    for cmd in commands:
        if cmd.closed:
            idx = state.pins.get(cmd.gripper_id)
            if idx is not None:
                pinned_targets[idx] = cmd.target
        else:
            radial = p[:, :2] - cmd.target[:2]
            close = (radial**2).sum(axis=1) < physics.push_radius**2
            push = close & (p[:, 2] > cmd.target[2])
            if np.any(push):
                p[push, 2] = cmd.target[2]
                v[push, 2] = np.minimum(v[push, 2], 0.0)

    # pinned grippers without a command this step hold their particle in place
    commanded = {c.gripper_id for c in commands}
    for gid, idx in state.pins.items():
        if gid not in commanded and idx not in pinned_targets:
            pinned_targets[idx] = state.positions[idx]

    _bar_project(p, v, scene)
    _box_project(p, scene)

    under = p[:, 2] < 0.0
    if np.any(under):
        p[under, 2] = 0.0
        v[under, 2] = np.maximum(v[under, 2], 0.0)

    for idx, target in pinned_targets.items():
        p[idx] = target
        v[idx] = 0.0

    if not np.isfinite(p).all() or not np.isfinite(v).all():
        raise NumericalDivergence("NaN/inf in cloth state")
    return out


def mechanical_energy(state: ClothState, physics: PhysicsConfig = _DEFAULT) -> float:
    """Spring potential plus kinetic energy (gravity excluded)."""
    ke = 0.5 * physics.particle_mass * float((state.velocities**2).sum())
    if len(state.spring_i) == 0:
        return ke
    length = np.linalg.norm(state.positions[state.spring_j] - state.positions[state.spring_i], axis=1)
    pe = 0.5 * float((state.spring_k * (length - state.spring_rest) ** 2).sum())
    return ke + pe


def settle(
    state: ClothState,
    scene: Scene,
    physics: PhysicsConfig = _DEFAULT,
    commands: list[GripperCommand] | None = None,
    max_steps: int | None = None,
    strict: bool = False,
) -> ClothState:
    """Step until the maximum particle speed drops below the rest threshold.

    With strict=True a budget overrun raises SettleTimeout; otherwise the
    state after the budget is returned as-is.
    """
    budget = max_steps if max_steps is not None else physics.settle_max_steps
    for _ in range(budget):
        state = step(state, scene, commands, physics.dt, physics)
        if state.max_speed() < physics.settle_speed:
            return state
    if strict:
        raise SettleTimeout(f"cloth did not settle within {budget} steps")
    return state


def _scripted_drop(
    state: ClothState,
    scene: Scene,
    physics: PhysicsConfig,
    particle: int,
    lift: float,
    lateral: np.ndarray,
    hold_steps: int = 30,
) -> ClothState:
    """Grasp one particle, carry it along an arc, drop it, settle briefly."""
    gid = "_crumple"
    state = state.copy()
    state.pins[gid] = particle
    start = state.positions[particle].copy()
    goal = start + np.array([lateral[0], lateral[1], lift])
    n_steps = max(int(np.ceil(np.linalg.norm(goal - start) / 0.004)), 1)
    for s in range(1, n_steps + 1):
        target = start + (goal - start) * s / n_steps
        cmd = GripperCommand(gid, target, closed=True)
        state = step(state, scene, [cmd], physics.dt, physics)
    for _ in range(hold_steps):
        state = step(state, scene, [GripperCommand(gid, goal, closed=True)], physics.dt, physics)
    del state.pins[gid]
    return settle(state, scene, physics, max_steps=800)


def apply_crumple(
    state: ClothState,
    seed: int,
    intensity: float,
    scene: Scene | None = None,
    physics: PhysicsConfig = _DEFAULT,
) -> ClothState:
    """Random grasp-lift-drop perturbations scaled by intensity, then settle."""
    if not 0.0 <= intensity <= 1.0:
        raise InvalidParameter(f"crumple intensity must be in [0, 1], got {intensity}")
    scene = scene or Scene()
    if intensity == 0.0:
        return state.copy()
    rng = np.random.default_rng(seed)
    n_drops = int(np.ceil(3 * intensity))
    extent = float(np.ptp(state.positions[:, :2], axis=0).max()) if state.n_particles else 0.1
    for _ in range(n_drops):
        particle = int(rng.integers(state.n_particles))
        lift = (0.06 + 0.16 * intensity) * (0.7 + 0.6 * rng.random())
        angle = rng.uniform(0.0, 2.0 * np.pi)
        reach = intensity * extent * (0.35 + 0.45 * rng.random())
        lateral = np.array([np.cos(angle), np.sin(angle)]) * reach
        # keep the drop point inside the workspace
        dest = state.positions[particle, :2] + lateral
        h = scene.half_extent - 0.02
        lateral += np.clip(dest, -h, h) - dest
        state = _scripted_drop(state, scene, physics, particle, lift, lateral)
    return settle(state, scene, physics, strict=True)
