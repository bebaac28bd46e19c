"""Finite-difference verification of every analytic parameter gradient."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameter
from .masking import mask_patches
from .model import DetectorModel

# weights that do not influence the keypoint loss path
_RECON_ONLY = ("dec_row", "dec_col", "dec_frame", "w_dec1", "b_dec1", "w_dec2", "b_dec2", "w_out", "b_out")


def _max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 3e-8) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float((np.abs(analytic - numeric) / denom).max(initial=0.0))


def grad_check(
    model: DetectorModel,
    frames: np.ndarray,
    target_heatmaps: np.ndarray,
    eps: float = 1e-5,
    mask_ratio: float = 0.5,
    mask_seed: int = 0,
) -> dict[str, float]:
    """Compare analytic gradients of both losses against central differences.

    frames: one sample (T, H, W); target_heatmaps: (K, H, W). The check runs
    in float64 regardless of the model dtype. Returns per-loss and overall
    maximum relative error over every parameter of every weight tensor.
    """
    if eps <= 0:
        raise InvalidParameter(f"eps must be positive, got {eps}")
    m = model.astype(np.float64)
    frames = np.asarray(frames, dtype=np.float64)
    targets = np.asarray(target_heatmaps, dtype=np.float64)

    masked, _ = mask_patches(frames, mask_ratio, mask_seed, m.patch_size, m.mask_token)
    recon_in = masked[None]
    recon_target = frames[None]
    kp_in = frames[None]
    kp_target = targets[None]

    _, grads_r, _ = m.loss_reconstruction(recon_in, recon_target)
    _, grads_k, _ = m.loss_keypoints(kp_in, kp_target)

    def loss_r() -> float:
        return m.loss_reconstruction(recon_in, recon_target, with_grads=False)[0]

    def loss_k() -> float:
        return m.loss_keypoints(kp_in, kp_target, with_grads=False)[0]

    worst = {"reconstruction": 0.0, "keypoints": 0.0}
    for name in m.WEIGHT_ORDER:
        w = m.weights[name]
        flat = w.ravel()
        fd_r = np.zeros(w.size)
        fd_k = np.zeros(w.size)
        check_kp = name not in _RECON_ONLY and name != "w_kp" and name != "b_kp"
        kp_only = name in ("w_kp", "b_kp")
        for i in range(w.size):
            orig = flat[i]
            flat[i] = orig + eps
            r_plus = loss_r() if not kp_only else 0.0
            k_plus = loss_k() if (check_kp or kp_only) else 0.0
            flat[i] = orig - eps
            r_minus = loss_r() if not kp_only else 0.0
            k_minus = loss_k() if (check_kp or kp_only) else 0.0
            flat[i] = orig
            fd_r[i] = (r_plus - r_minus) / (2 * eps)
            fd_k[i] = (k_plus - k_minus) / (2 * eps)
        if not kp_only:
            err = _max_relative_error(grads_r[name].ravel(), fd_r)
            worst["reconstruction"] = max(worst["reconstruction"], err)
        if check_kp or kp_only:
            err = _max_relative_error(grads_k[name].ravel(), fd_k)
            worst["keypoints"] = max(worst["keypoints"], err)
    worst["max"] = max(worst["reconstruction"], worst["keypoints"])
    return worst
