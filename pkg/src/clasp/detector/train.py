"""Two-stage training: masked reconstruction pretraining, then keypoint head."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergedTraining, InvalidParameter, SchemaMismatch
from ..percept import extract_keypoints, make_heatmaps, mean_ap, akd as akd_metric
from ..vocab import vocabulary_for
from .dataset import Dataset
from .masking import mask_patches
from .model import DetectorModel


@dataclass
class TrainConfig:
    mask_ratio: float = 0.75
    epochs: int = 100                # per stage
    learning_rate: float = 1e-3
    batch_size: int = 16
    seed: int = 0
    sequence_length: int = 4
    embed_dim: int = 64
    heatmap_sigma: float = 4.0

    def __post_init__(self):
        if not 0.0 <= self.mask_ratio <= 0.95:
            raise InvalidParameter(f"mask ratio must be in [0, 0.95], got {self.mask_ratio}")


class Adam:
    """Adaptive moment estimation over a dict of weight arrays."""

    def __init__(self, weights: dict[str, np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in weights.items()}
        self.v = {k: np.zeros_like(v) for k, v in weights.items()}

    def step(self, weights: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            weights[name] -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def _batch_indices(n: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    order = rng.permutation(n)
    return [order[k : k + batch_size] for k in range(0, n, batch_size)]


def _stack_frames(dataset: Dataset, indices: np.ndarray, dtype) -> np.ndarray:
    return np.stack([dataset.sequences[i].frames for i in indices]).astype(dtype)


def pretrain_reconstruction(
    dataset: Dataset,
    config: TrainConfig,
    model: DetectorModel | None = None,
) -> tuple[DetectorModel, list[dict]]:
    """Stage one: reconstruct full frames from randomly masked inputs.

    Returns the trained model and a per-epoch curve with the full-image MSE
    and the masked-patch-only MSE (diagnostic).
    """
    if config.epochs < 1:
        raise InvalidParameter("epochs must be >= 1")
    train_idx = dataset.split_indices("train")
    if len(train_idx) == 0:
        raise InvalidParameter("dataset has no training sequences")
    category = dataset.category
    if model is None:
        model = DetectorModel.build(
            category,
            frames_per_input=config.sequence_length,
            embed_dim=config.embed_dim,
            seed=config.seed,
        )
    dtype = model.weights["w_embed"].dtype
    optimizer = Adam(model.weights, lr=config.learning_rate)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xEC0]))
    curve: list[dict] = []
    grid = model.grid
    patch_area = model.patch_size**2

    for epoch in range(config.epochs):
        epoch_loss = 0.0
        masked_loss = 0.0
        n_seen = 0
        for batch in _batch_indices(len(train_idx), config.batch_size, rng):
            idx = train_idx[batch]
            targets = _stack_frames(dataset, idx, dtype)
            inputs = np.empty_like(targets)
            mask_area = np.zeros(targets.shape, dtype=bool)
            for b, i in enumerate(idx):
                seed = int(np.random.SeedSequence([config.seed, 0xA5C, epoch, int(i)]).generate_state(1)[0])
                inputs[b], idx_sets = mask_patches(
                    targets[b], config.mask_ratio, seed, model.patch_size, model.mask_token
                )
                ps = model.patch_size
                for f, patches in enumerate(idx_sets):
                    for p in patches:
                        r, c = divmod(int(p), grid)
                        mask_area[b, f, r * ps : (r + 1) * ps, c * ps : (c + 1) * ps] = True
            loss, grads, recon = model.loss_reconstruction(inputs, targets)
            if not np.isfinite(loss):
                raise DivergedTraining(f"reconstruction loss diverged at epoch {epoch}", epoch)
            optimizer.step(model.weights, grads)
            epoch_loss += loss * len(idx)
            if mask_area.any():
                err = (recon - model._normalize(targets))[mask_area]
                masked_loss += float((err.astype(np.float64) ** 2).mean()) * len(idx)
            n_seen += len(idx)
        curve.append(
            {"epoch": epoch, "loss": epoch_loss / n_seen, "masked_loss": masked_loss / n_seen}
        )
    return model, curve


def train_keypoint_head(
    dataset: Dataset,
    model: DetectorModel,
    config: TrainConfig,
) -> tuple[DetectorModel, list[dict]]:
    """Stage two: fit the heatmap head while fine-tuning the encoder."""
    if config.epochs < 1:
        raise InvalidParameter("epochs must be >= 1")
    vocab = vocabulary_for(dataset.category)
    if model.n_channels != len(vocab):
        raise SchemaMismatch(
            f"model emits {model.n_channels} channels but {dataset.category} has {len(vocab)} descriptors"
        )
    train_idx = dataset.split_indices("train")
    dtype = model.weights["w_embed"].dtype
    optimizer = Adam(model.weights, lr=config.learning_rate)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xA11]))
    curve: list[dict] = []

    target_cache: dict[int, np.ndarray] = {}

    def targets_for(i: int) -> np.ndarray:
        if i not in target_cache:
            kps = dataset.sequences[i].keypoints[-1]
            target_cache[i] = make_heatmaps(kps, sigma=config.heatmap_sigma).astype(dtype)
        return target_cache[i]

    for epoch in range(config.epochs):
        epoch_loss = 0.0
        n_seen = 0
        for batch in _batch_indices(len(train_idx), config.batch_size, rng):
            idx = train_idx[batch]
            frames = _stack_frames(dataset, idx, dtype)
            heatmaps = np.stack([targets_for(int(i)) for i in idx])
            loss, grads, _ = model.loss_keypoints(frames, heatmaps)
            if not np.isfinite(loss):
                raise DivergedTraining(f"keypoint loss diverged at epoch {epoch}", epoch)
            optimizer.step(model.weights, grads)
            epoch_loss += loss * len(idx)
            n_seen += len(idx)
        curve.append({"epoch": epoch, "loss": epoch_loss / n_seen})
    return model, curve


def evaluate_detector(model: DetectorModel, dataset: Dataset, split: str = "val") -> dict:
    """Held-out AKD and MAP of argmax-decoded predictions on last frames."""
    vocab = vocabulary_for(dataset.category)
    akds, maps = [], []
    for i in dataset.split_indices(split):
        seq = dataset.sequences[i]
        heatmaps = model.infer_heatmaps(seq.frames)
        pred = extract_keypoints(np.asarray(heatmaps, dtype=np.float64), vocab)
        gt = seq.keypoints[-1]
        akds.append(akd_metric(pred, gt))
        maps.append(mean_ap(pred, gt))
    return {
        "akd": float(np.mean(akds)),
        "map": float(np.mean(maps)),
        "n": len(akds),
    }
