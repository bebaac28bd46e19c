"""Random patch masking for reconstruction pretraining."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidParameter


def mask_patches(
    frames: np.ndarray,
    ratio: float,
    seed: int,
    patch_size: int = 16,
    mask_token: float = -0.1,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Replace ceil(ratio * n_patches) patches per frame with the mask token.

    frames: (T, H, W). Patches are drawn uniformly without replacement,
    independently per frame; the draw is fully determined by the seed.
    Returns (masked copy, per-frame sorted patch-index arrays).
    """
    if not 0.0 <= ratio <= 0.95:
        raise InvalidParameter(f"masking ratio must be in [0, 0.95], got {ratio}")
    frames = np.asarray(frames)
    if frames.ndim != 3:
        raise InvalidParameter(f"expected (T, H, W) frames, got shape {frames.shape}")
    t, h, w = frames.shape
    grid = h // patch_size
    n_patches = grid * (w // patch_size)
    n_masked = math.ceil(ratio * n_patches)

    rng = np.random.default_rng(seed)
    masked = frames.copy()
    index_sets = []
    for f in range(t):
        chosen = np.sort(rng.choice(n_patches, size=n_masked, replace=False))
        for p in chosen:
            r, c = divmod(int(p), grid)
            masked[
                f,
                r * patch_size : (r + 1) * patch_size,
                c * patch_size : (c + 1) * patch_size,
            ] = mask_token
        index_sets.append(chosen)
    return masked, index_sets
