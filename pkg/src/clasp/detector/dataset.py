"""Sequence dataset: scripted manipulations rendered to depth frames.

Each sequence is one garment instance under a short random manipulation
(partial fold drag or a lift-and-drop), sampled at T evenly spaced frames
with ground-truth keypoints projected per frame.

On-disk layout (one directory per sequence)::

    seq_00000/
      meta.json        category, T, resolution, vocabulary, seed
      frames.bin       float32 LE, T x H x W, row-major
      keypoints.json   per-frame semantic keypoint sets
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import PhysicsConfig
from ..errors import InvalidParameter, NumericalDivergence
from ..percept import SemanticKeypointSet, project_keypoints
from ..sim import GripperCommand, OrthoCamera, Scene, build_template, instantiate_cloth, render_depth
from ..sim.dynamics import settle, step
from ..vocab import CATEGORY_DESCRIPTORS

log = logging.getLogger(__name__)


@dataclass
class Sequence:
    category: str
    frames: np.ndarray                      # (T, H, W) float32
    keypoints: list[SemanticKeypointSet]    # one per frame
    seed: int = 0


@dataclass
class Dataset:
    sequences: list[Sequence]
    category: str
    seed: int = 0
    splits: dict[str, list[int]] = field(default_factory=dict)

    def split_indices(self, name: str) -> np.ndarray:
        return np.asarray(self.splits.get(name, []), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.sequences)


def _scripted_manipulation_frames(
    category: str,
    rng: np.random.Generator,
    T: int,
    camera: OrthoCamera,
    physics: PhysicsConfig,
    thickness: float,
) -> tuple[np.ndarray, list[SemanticKeypointSet]]:
    """Instantiate a randomized garment, run one scripted move, sample T frames."""
    scene = Scene()
    template = build_template(category)
    dims = (rng.uniform(0.85, 1.15), rng.uniform(0.85, 1.15))
    # rotation capped at +-0.6 rad: larger rotations make material corner
    # labels of near-symmetric garments ambiguous from depth alone
    pose = (rng.uniform(-0.6, 0.6), rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06))
    state = instantiate_cloth(template, dims=dims, pose=pose)

    # one scripted move: drag an anchor toward another, or lift and drop it
    anchors = list(template.anchor_vertices.values())
    src = anchors[int(rng.integers(len(anchors)))]
    kind = rng.random()
    start = state.positions[src].copy()
    if kind < 0.6:
        dst_anchor = anchors[int(rng.integers(len(anchors)))]
        goal_xy = state.positions[dst_anchor, :2]
        frac = rng.uniform(0.5, 1.0)
        goal = np.array([
            start[0] + frac * (goal_xy[0] - start[0]),
            start[1] + frac * (goal_xy[1] - start[1]),
            0.02,
        ])
        lift = 0.06
    else:
        angle = rng.uniform(0, 2 * np.pi)
        reach = rng.uniform(0.05, 0.15)
        goal = start + np.array([reach * np.cos(angle), reach * np.sin(angle), 0.04])
        h = scene.half_extent - 0.02
        goal[:2] = np.clip(goal[:2], -h, h)
        lift = rng.uniform(0.08, 0.16)

    gid = "_script"
    state.pins[gid] = src
    waypoints = [start + np.array([0, 0, lift]), np.array([goal[0], goal[1], lift]), goal]
    schedule = []
    pos = start
    for wp in waypoints:
        n_steps = max(int(np.ceil(np.linalg.norm(wp - pos) / 0.004)), 1)
        for s in range(1, n_steps + 1):
            schedule.append((pos + (wp - pos) * s / n_steps, True))
        pos = wp
    release_at = len(schedule)
    settle_steps = 260
    schedule += [(None, False)] * settle_steps

    total = len(schedule)
    capture = sorted(set(int(round(k)) for k in np.linspace(0, total - 1, T)))
    while len(capture) < T:
        capture.append(total - 1)

    frames, keypoint_sets = [], []
    for tick, (target, closed) in enumerate(schedule):
        if tick == release_at and gid in state.pins:
            del state.pins[gid]
        cmds = [GripperCommand(gid, target, True)] if closed else []
        state = step(state, scene, cmds, physics.dt, physics)
        if tick in capture:
            frames.append(render_depth(state, camera, thickness))
            keypoint_sets.append(project_keypoints(state, camera))
    return np.stack(frames), keypoint_sets


def make_dataset(
    n_sequences: int,
    T: int = 4,
    categories: tuple[str, ...] = ("towel",),
    seed: int = 0,
    n_val: int | None = None,
    n_test: int | None = None,
    camera: OrthoCamera = OrthoCamera(),
    physics: PhysicsConfig | None = None,
    thickness: float = 0.004,
) -> Dataset:
    """Generate n sequences; deterministic for a fixed seed.

    Splits default to the 80/10/10 rule (val = test = round(0.1 n)).
    Diverged simulations are resampled with a derived seed and logged.
    """
    if n_sequences < 1 or T < 1:
        raise InvalidParameter("need n_sequences >= 1 and T >= 1")
    for c in categories:
        if c not in CATEGORY_DESCRIPTORS:
            raise InvalidParameter(f"unknown category {c!r}")
    physics = physics or PhysicsConfig()
    sequences = []
    for i in range(n_sequences):
        category = categories[i % len(categories)]
        for attempt in range(8):
            rng = np.random.default_rng(np.random.SeedSequence([seed, i, attempt]))
            try:
                frames, kps = _scripted_manipulation_frames(category, rng, T, camera, physics, thickness)
                sequences.append(Sequence(category=category, frames=frames, keypoints=kps, seed=seed))
                break
            except NumericalDivergence:
                log.warning("sequence %d diverged (attempt %d); resampling", i, attempt)
        else:
            raise NumericalDivergence(f"sequence {i} kept diverging; check physics settings")

    n_val = int(round(0.1 * n_sequences)) if n_val is None else n_val
    n_test = int(round(0.1 * n_sequences)) if n_test is None else n_test
    n_train = n_sequences - n_val - n_test
    if n_train < 1:
        raise InvalidParameter("split leaves no training sequences")
    splits = {
        "train": list(range(n_train)),
        "val": list(range(n_train, n_train + n_val)),
        "test": list(range(n_train + n_val, n_sequences)),
    }
    if len(set(categories)) > 1:
        category = "mixed"
    else:
        category = categories[0]
    return Dataset(sequences=sequences, category=category, seed=seed, splits=splits)


def save_dataset(dataset: Dataset, root: str | Path) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    index = {
        "category": dataset.category,
        "seed": dataset.seed,
        "n_sequences": len(dataset.sequences),
        "splits": dataset.splits,
    }
    (root / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    for i, seq in enumerate(dataset.sequences):
        d = root / f"seq_{i:05d}"
        d.mkdir(exist_ok=True)
        t, h, w = seq.frames.shape
        meta = {
            "category": seq.category,
            "T": t,
            "resolution": [h, w],
            "vocabulary": list(CATEGORY_DESCRIPTORS[seq.category]),
            "seed": seq.seed,
        }
        (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        (d / "frames.bin").write_bytes(np.ascontiguousarray(seq.frames, dtype="<f4").tobytes())
        kp_payload = [s.to_json_dict() for s in seq.keypoints]
        (d / "keypoints.json").write_text(json.dumps(kp_payload, indent=2, sort_keys=True) + "\n")


def load_dataset(root: str | Path) -> Dataset:
    root = Path(root)
    index = json.loads((root / "index.json").read_text())
    sequences = []
    for i in range(index["n_sequences"]):
        d = root / f"seq_{i:05d}"
        meta = json.loads((d / "meta.json").read_text())
        t = meta["T"]
        h, w = meta["resolution"]
        frames = np.frombuffer((d / "frames.bin").read_bytes(), dtype="<f4").reshape(t, h, w)
        kp_payload = json.loads((d / "keypoints.json").read_text())
        kps = [SemanticKeypointSet.from_json_dict(item) for item in kp_payload]
        sequences.append(Sequence(category=meta["category"], frames=frames.copy(), keypoints=kps, seed=meta["seed"]))
    return Dataset(
        sequences=sequences,
        category=index["category"],
        seed=index["seed"],
        splits={k: list(v) for k, v in index["splits"].items()},
    )
