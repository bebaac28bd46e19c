"""Runtime configuration.

All physics, camera, skill, and benchmark constants live here with their
defaults, overridable from an INI-style key-value file::

    [physics]
    dt = 0.005
    stiffness_structural = 800.0

    [skills]
    max_speed = 0.5

Only keys that exist as dataclass fields are accepted; unknown keys raise,
so typos in config files fail loudly.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidParameter


@dataclass
class PhysicsConfig:
    dt: float = 0.005                    # integrator substep (s)
    substeps_per_tick: int = 4           # substeps per 0.02 s control tick
    damping: float = 0.02                # velocity damping per substep
    stiffness_structural: float = 800.0  # N/m
    stiffness_shear: float = 400.0
    stiffness_bend: float = 100.0
    particle_mass: float = 0.08          # kg; sized for stability at dt=0.005
    gravity: float = 9.81                # m/s^2, downward
    settle_speed: float = 1e-3           # max particle speed counting as "at rest"
    settle_max_steps: int = 4000
    grasp_radius: float = 0.02           # m, pin attaches nearest particle within this
    push_radius: float = 0.015           # m, open-gripper press footprint


@dataclass
class CameraConfig:
    resolution: int = 224
    extent: float = 1.0                  # square workspace side (m), centered at origin
    cloth_thickness: float = 0.004      # rendered sheet thickness (m)


@dataclass
class SkillsConfig:
    approach_clearance: float = 0.05     # m above contact before descending
    transport_height: float = 0.08       # m, moveto travel height
    place_clearance: float = 0.02        # m above target at end of moveto
    receptacle_clearance: float = 0.25   # extra travel height above a box rim
    press_depth: float = 0.01            # m below contact surface
    pull_fraction: float = 0.10          # total elongation as a fraction of grip distance
    control_tick: float = 0.02           # s
    max_speed: float = 0.5               # m/s
    min_grip_separation: float = 0.03    # m, enforced at compile time
    min_confidence: float = 0.1          # grounding rejects keypoints below this


@dataclass
class BenchConfig:
    fold_tolerance: float = 0.15         # fraction of flat bounding-box diagonal
    flatten_coverage: float = 0.85       # fraction of flat coverage
    place_coverage: float = 0.60
    place_containment: float = 0.95      # fraction of particles inside footprint
    hang_clearance: float = 0.01         # m above ground
    hang_bar_distance: float = 0.01      # m from bar surface
    trials_per_task: int = 20            # 120 for full runs
    coverage_log_stride: int = 5         # ticks between coverage samples in logs


@dataclass
class DetectorConfig:
    patch_size: int = 16
    embed_dim: int = 64
    mask_ratio: float = 0.75
    epochs: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 16
    sequence_length: int = 4
    heatmap_sigma: float = 4.0
    mask_token: float = -0.1             # in meters; about -1 after input scaling
    input_scale: float = 10.0            # depth (m) -> network units


@dataclass
class Config:
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    camera: CameraConfig = field(default_factory=CameraConfig)
    skills: SkillsConfig = field(default_factory=SkillsConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)


def load_config(path: str | Path | None = None) -> Config:
    """Build a Config from defaults, overlaying values from an INI file."""
    cfg = Config()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    read = parser.read(str(path))
    if not read:
        raise InvalidParameter(f"config file not found: {path}")
    for section in parser.sections():
        if not hasattr(cfg, section):
            raise InvalidParameter(f"unknown config section [{section}]")
        sub = getattr(cfg, section)
        fields = {f.name: f.type for f in dataclasses.fields(sub)}
        for key, raw in parser.items(section):
            if key not in fields:
                raise InvalidParameter(f"unknown config key {section}.{key}")
            current = getattr(sub, key)
            value = type(current)(raw) if not isinstance(current, bool) else raw.lower() in ("1", "true", "yes")
            setattr(sub, key, value)
    return cfg


def save_config(cfg: Config, path: str | Path) -> None:
    parser = configparser.ConfigParser()
    for section in ("physics", "camera", "skills", "bench", "detector"):
        sub = getattr(cfg, section)
        parser[section] = {f.name: repr(getattr(sub, f.name)) for f in dataclasses.fields(sub)}
    with open(path, "w") as fh:
        parser.write(fh)
