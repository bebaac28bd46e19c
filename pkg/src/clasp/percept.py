"""Semantic keypoints: ground-truth projection, heatmaps, decoding, metrics.

A semantic keypoint couples a language descriptor ("left_sleeve") with a 2-D
pixel position; sets of them are the interface between perception, planning,
and grounding. Everything here is a pure function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameter, SchemaMismatch
from .sim.camera import OrthoCamera
from .sim.state import ClothState
from .vocab import Vocabulary, vocabulary_for

__all__ = [
    "Vocabulary", "vocabulary_for", "Keypoint", "SemanticKeypointSet",
    "project_keypoints", "make_heatmaps", "extract_keypoints",
    "akd", "ap_at", "mean_ap", "DEFAULT_AP_THRESHOLDS",
]

DEFAULT_AP_THRESHOLDS = (8.0, 4.0, 2.0)


@dataclass
class Keypoint:
    descriptor: str
    row: int
    col: int
    world: np.ndarray | None = None      # (3,) meters, when known
    occluded: bool = False
    confidence: float = 1.0


@dataclass
class SemanticKeypointSet:
    """One keypoint per vocabulary descriptor, in vocabulary order."""

    category: str
    keypoints: list[Keypoint] = field(default_factory=list)

    @property
    def vocabulary(self) -> Vocabulary:
        return vocabulary_for(self.category)

    def __len__(self) -> int:
        return len(self.keypoints)

    def get(self, descriptor: str) -> Keypoint:
        for kp in self.keypoints:
            if kp.descriptor == descriptor:
                return kp
        raise SchemaMismatch(f"no keypoint for descriptor {descriptor!r}")

    def pixels(self) -> np.ndarray:
        return np.array([[kp.row, kp.col] for kp in self.keypoints], dtype=np.int64)

    def validate(self, resolution: int = 224) -> None:
        vocab = self.vocabulary
        names = [kp.descriptor for kp in self.keypoints]
        if tuple(names) != vocab.descriptors:
            raise SchemaMismatch(
                f"keypoint set does not match the {self.category} vocabulary order"
            )
        for kp in self.keypoints:
            if not (0 <= kp.row < resolution and 0 <= kp.col < resolution):
                raise SchemaMismatch(f"{kp.descriptor}: pixel out of bounds")

    def to_json_dict(self) -> dict:
        return {
            "category": self.category,
            "keypoints": [
                {
                    "descriptor": kp.descriptor,
                    "row": int(kp.row),
                    "col": int(kp.col),
                    "world": None if kp.world is None else [float(v) for v in kp.world],
                    "occluded": bool(kp.occluded),
                    "confidence": float(kp.confidence),
                }
                for kp in self.keypoints
            ],
        }

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_json_dict(cls, data: dict) -> "SemanticKeypointSet":
        kps = [
            Keypoint(
                descriptor=item["descriptor"],
                row=int(item["row"]),
                col=int(item["col"]),
                world=None if item.get("world") is None else np.asarray(item["world"], dtype=float),
                occluded=bool(item.get("occluded", False)),
                confidence=float(item.get("confidence", 1.0)),
            )
            for item in data["keypoints"]
        ]
        return cls(category=data["category"], keypoints=kps)

    @classmethod
    def load_json(cls, path: str | Path) -> "SemanticKeypointSet":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _point_occluded(state: ClothState, vertex: int, tol: float = 1e-6) -> bool:
    """True if a non-adjacent cloth triangle covers the vertex from above."""
    template = state.template
    if template is None or len(template.triangles) == 0:
        return False
    tris = template.triangles
    adjacent = np.any(tris == vertex, axis=1)
    others = tris[~adjacent]
    if len(others) == 0:
        return False
    p = state.positions[vertex]
    v0 = state.positions[others[:, 0]]
    v1 = state.positions[others[:, 1]]
    v2 = state.positions[others[:, 2]]
    # barycentric membership of (x, y) in each candidate triangle
    d = (v1[:, 1] - v2[:, 1]) * (v0[:, 0] - v2[:, 0]) + (v2[:, 0] - v1[:, 0]) * (v0[:, 1] - v2[:, 1])
    ok = np.abs(d) > 1e-30
    a = ((v1[:, 1] - v2[:, 1]) * (p[0] - v2[:, 0]) + (v2[:, 0] - v1[:, 0]) * (p[1] - v2[:, 1])) / np.where(ok, d, 1.0)
    b = ((v2[:, 1] - v0[:, 1]) * (p[0] - v2[:, 0]) + (v0[:, 0] - v2[:, 0]) * (p[1] - v2[:, 1])) / np.where(ok, d, 1.0)
    c = 1.0 - a - b
    inside = ok & (a >= -1e-9) & (b >= -1e-9) & (c >= -1e-9)
    if not np.any(inside):
        return False
    z_at = a * v0[:, 2] + b * v1[:, 2] + c * v2[:, 2]
    return bool(np.any(z_at[inside] >= p[2] - tol))


def project_keypoints(
    state: ClothState,
    camera: OrthoCamera = OrthoCamera(),
    vocab: Vocabulary | None = None,
) -> SemanticKeypointSet:
    """Ground-truth keypoints: template anchors projected into the image.

    Occluded anchors keep their projected position and world coordinates;
    only the flag is set, since inferring hidden structure is exactly what
    the detector is trained for.
    """
    template = state.template
    if template is None:
        raise SchemaMismatch("cloth state has no template attached")
    vocab = vocab or vocabulary_for(template.category)
    kps = []
    n = camera.resolution
    for descriptor in vocab.descriptors:
        if descriptor not in template.anchor_vertices:
            raise SchemaMismatch(f"template lacks anchor for {descriptor!r}")
        vertex = template.anchor_vertices[descriptor]
        world = state.positions[vertex]
        rc = camera.world_to_pixel(world[:2])[0]
        row = int(np.clip(rc[0], 0, n - 1))
        col = int(np.clip(rc[1], 0, n - 1))
        kps.append(
            Keypoint(
                descriptor=descriptor,
                row=row,
                col=col,
                world=world.copy(),
                occluded=_point_occluded(state, vertex),
                confidence=1.0,
            )
        )
    return SemanticKeypointSet(category=vocab.category, keypoints=kps)


def make_heatmaps(kps: SemanticKeypointSet, sigma: float = 4.0, resolution: int = 224) -> np.ndarray:
    """(K, H, W) stack of unnormalized Gaussians, peak 1.0 at each keypoint."""
    if sigma <= 0:
        raise InvalidParameter(f"sigma must be positive, got {sigma}")
    rows = np.arange(resolution)[:, None]
    cols = np.arange(resolution)[None, :]
    stack = np.empty((len(kps), resolution, resolution))
    for k, kp in enumerate(kps.keypoints):
        d2 = (rows - kp.row) ** 2 + (cols - kp.col) ** 2
        stack[k] = np.exp(-d2 / (2.0 * sigma * sigma))
    return stack


def extract_keypoints(heatmaps: np.ndarray, vocab: Vocabulary) -> SemanticKeypointSet:
    """Per-channel argmax decoding, ties broken at the lowest row-major index."""
    if heatmaps.ndim != 3 or heatmaps.shape[0] != len(vocab):
        raise SchemaMismatch(
            f"heatmap stack {heatmaps.shape} does not match vocabulary size {len(vocab)}"
        )
    _, h, w = heatmaps.shape
    kps = []
    for k, descriptor in enumerate(vocab.descriptors):
        flat = int(np.argmax(heatmaps[k]))
        row, col = divmod(flat, w)
        conf = float(np.clip(heatmaps[k, row, col], 0.0, 1.0))
        kps.append(Keypoint(descriptor=descriptor, row=row, col=col, confidence=conf))
    return SemanticKeypointSet(category=vocab.category, keypoints=kps)


def _paired_distances(pred: SemanticKeypointSet, gt: SemanticKeypointSet) -> np.ndarray:
    if pred.category != gt.category or len(pred) != len(gt):
        raise SchemaMismatch("prediction and ground truth use different vocabularies")
    for a, b in zip(pred.keypoints, gt.keypoints):
        if a.descriptor != b.descriptor:
            raise SchemaMismatch("prediction and ground truth use different vocabularies")
    d = pred.pixels().astype(float) - gt.pixels().astype(float)
    return np.sqrt((d**2).sum(axis=1))


def akd(pred: SemanticKeypointSet, gt: SemanticKeypointSet) -> float:
    """Average keypoint distance in pixels."""
    return float(_paired_distances(pred, gt).mean())


def ap_at(pred: SemanticKeypointSet, gt: SemanticKeypointSet, tau: float) -> float:
    """Fraction of keypoints within tau pixels of ground truth."""
    if tau <= 0:
        raise InvalidParameter(f"threshold must be positive, got {tau}")
    return float((_paired_distances(pred, gt) <= tau).mean())


def mean_ap(
    pred: SemanticKeypointSet,
    gt: SemanticKeypointSet,
    taus: tuple[float, ...] = DEFAULT_AP_THRESHOLDS,
) -> float:
    """Mean of ap_at over the threshold set (default 8, 4, 2 px)."""
    return float(np.mean([ap_at(pred, gt, tau) for tau in taus]))
