"""Patch-embedding encoder/decoder with a factored token-mixing layer.

Depth frames are cut into 16 px patches, embedded per patch, passed through
two per-patch tanh layers, and mixed across the token grid by one linear
layer factored over the (row, column, frame) axes. The decoder mirrors the
encoder and reconstructs patches; a per-patch affine head emits K low-res
heatmap channels that are bilinearly upsampled to full resolution. The
factored mixing gives every token a full receptive field (required to
inpaint masked patches) while keeping the parameter count small enough
for exhaustive finite-difference verification.

All forward and backward passes are explicit numpy; there is no autograd.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput, InvalidParameter, SchemaMismatch
from ..vocab import vocabulary_for


def sincos_1d(n: int, dim: int, base: float = 10000.0) -> np.ndarray:
    """(n, dim) sinusoidal table; dim must be even."""
    half = dim // 2
    freqs = 1.0 / (base ** (np.arange(half) / max(half, 1)))
    angles = np.arange(n)[:, None] * freqs[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)


def sincos_2d(grid: int, dim: int) -> np.ndarray:
    """(grid, grid, dim) positional table from per-axis halves."""
    if dim % 4 != 0:
        raise InvalidParameter(f"embedding dim must be divisible by 4, got {dim}")
    rows = sincos_1d(grid, dim // 2)
    cols = sincos_1d(grid, dim // 2)
    out = np.zeros((grid, grid, dim))
    out[:, :, : dim // 2] = rows[:, None, :]
    out[:, :, dim // 2 :] = cols[None, :, :]
    return out


def bilinear_matrix(n_out: int, n_in: int) -> np.ndarray:
    """(n_out, n_in) 1-D bilinear interpolation with half-pixel alignment."""
    scale = n_in / n_out
    R = np.zeros((n_out, n_in))
    for o in range(n_out):
        u = (o + 0.5) * scale - 0.5
        i0 = int(np.floor(u))
        frac = u - i0
        lo = min(max(i0, 0), n_in - 1)
        hi = min(max(i0 + 1, 0), n_in - 1)
        R[o, lo] += 1.0 - frac
        R[o, hi] += frac
    return R


def _mix_rows(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    # X (B,T,R,C,D), contract R
    Xt = X.transpose(0, 1, 3, 2, 4)
    return np.matmul(A, Xt).transpose(0, 1, 3, 2, 4)


def _mix_cols(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    # C sits at -2 already
    return np.matmul(A, X)


def _mix_frames(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    Xt = X.transpose(0, 2, 3, 1, 4)
    return np.matmul(A, Xt).transpose(0, 3, 1, 2, 4)


def _flat_outer(X: np.ndarray, dY: np.ndarray) -> np.ndarray:
    """Sum of per-token outer products: (..., a), (..., b) -> (a, b)."""
    return X.reshape(-1, X.shape[-1]).T @ dY.reshape(-1, dY.shape[-1])


def _axis_outer(dY: np.ndarray, X: np.ndarray, axis: int) -> np.ndarray:
    """Gradient of a mixing matrix applied along `axis`: (n, n)."""
    d = np.moveaxis(dY, axis, 0)
    x = np.moveaxis(X, axis, 0)
    return d.reshape(d.shape[0], -1) @ x.reshape(x.shape[0], -1).T


@dataclass
class DetectorModel:
    """Weights plus fixed encodings for one clothes category."""

    category: str
    frames_per_input: int
    embed_dim: int
    weights: dict[str, np.ndarray]
    patch_size: int = 16
    resolution: int = 224
    mask_token: float = -0.1
    input_scale: float = 10.0
    input_transform: str = "linear"      # "linear" | "signed_sqrt"
    pos_encoding: np.ndarray = field(repr=False, default=None)
    frame_encoding: np.ndarray = field(repr=False, default=None)
    upsample: np.ndarray = field(repr=False, default=None)

    WEIGHT_ORDER = (
        "w_embed", "b_embed",
        "w_enc1", "b_enc1", "w_enc2", "b_enc2",
        "mix_row", "mix_col", "mix_frame",
        "dec_row", "dec_col", "dec_frame",
        "w_dec1", "b_dec1", "w_dec2", "b_dec2",
        "w_out", "b_out",
        "w_kp", "b_kp",
    )

    # --- construction ---------------------------------------------------

    @classmethod
    def build(
        cls,
        category: str,
        frames_per_input: int = 4,
        embed_dim: int = 64,
        seed: int = 0,
        dtype=np.float32,
        patch_size: int = 16,
        resolution: int = 224,
        mask_token: float = -0.1,
        input_scale: float = 10.0,
        input_transform: str = "linear",
    ) -> "DetectorModel":
        vocab = vocabulary_for(category)
        K = len(vocab)
        T = frames_per_input
        D = embed_dim
        P = patch_size * patch_size
        G = resolution // patch_size
        rng = np.random.default_rng(seed)

        def xavier(n_in, n_out):
            bound = np.sqrt(6.0 / (n_in + n_out))
            return rng.uniform(-bound, bound, size=(n_in, n_out))

        def near_identity(n):
            return np.eye(n) + 0.02 * rng.standard_normal((n, n))

        w = {
            "w_embed": xavier(P, D), "b_embed": np.zeros(D),
            "w_enc1": xavier(D, D), "b_enc1": np.zeros(D),
            "w_enc2": xavier(D, D), "b_enc2": np.zeros(D),
            "mix_row": near_identity(G), "mix_col": near_identity(G),
            "mix_frame": near_identity(T),
            "dec_row": near_identity(G), "dec_col": near_identity(G),
            "dec_frame": near_identity(T),
            "w_dec1": xavier(D, D), "b_dec1": np.zeros(D),
            "w_dec2": xavier(D, D), "b_dec2": np.zeros(D),
            "w_out": xavier(D, P), "b_out": np.zeros(P),
            "w_kp": xavier(D, K), "b_kp": np.zeros(K),
        }
        model = cls(
            category=category,
            frames_per_input=T,
            embed_dim=D,
            weights={k: v.astype(dtype) for k, v in w.items()},
            patch_size=patch_size,
            resolution=resolution,
            mask_token=mask_token,
            input_scale=input_scale,
            input_transform=input_transform,
        )
        model._finalize()
        return model

    def _finalize(self) -> None:
        dtype = self.weights["w_embed"].dtype
        G = self.grid
        self.pos_encoding = sincos_2d(G, self.embed_dim).astype(dtype)
        self.frame_encoding = (
            0.5 * sincos_1d(self.frames_per_input, self.embed_dim, base=300.0)
        ).astype(dtype)
        self.upsample = bilinear_matrix(self.resolution, G).astype(dtype)

    def astype(self, dtype) -> "DetectorModel":
        clone = DetectorModel(
            category=self.category,
            frames_per_input=self.frames_per_input,
            embed_dim=self.embed_dim,
            weights={k: v.astype(dtype) for k, v in self.weights.items()},
            patch_size=self.patch_size,
            resolution=self.resolution,
            mask_token=self.mask_token,
            input_scale=self.input_scale,
            input_transform=self.input_transform,
        )
        clone._finalize()
        return clone

    def _normalize(self, frames: np.ndarray) -> np.ndarray:
        """Fixed input normalization from meters to network units."""
        scale = np.asarray(self.input_scale, dtype=frames.dtype)
        if self.input_transform == "signed_sqrt":
            return np.sign(frames) * np.sqrt(np.abs(frames)) * scale
        return frames * scale

    @property
    def grid(self) -> int:
        return self.resolution // self.patch_size

    @property
    def n_channels(self) -> int:
        return self.weights["w_kp"].shape[1]

    @property
    def vocab(self):
        return vocabulary_for(self.category)

    # --- patch plumbing ---------------------------------------------------

    def patchify(self, frames: np.ndarray) -> np.ndarray:
        """(..., H, W) -> (..., G, G, patch^2)."""
        p, g = self.patch_size, self.grid
        lead = frames.shape[:-2]
        x = frames.reshape(*lead, g, p, g, p)
        x = np.moveaxis(x, -3, -2)
        return x.reshape(*lead, g, g, p * p)

    def unpatchify(self, patches: np.ndarray) -> np.ndarray:
        p, g = self.patch_size, self.grid
        lead = patches.shape[:-3]
        x = patches.reshape(*lead, g, g, p, p)
        x = np.moveaxis(x, -2, -3)
        return x.reshape(*lead, g * p, g * p)

    # --- forward ---------------------------------------------------------

    def encode(self, frames: np.ndarray, cache: dict | None = None) -> np.ndarray:
        """frames (B,T,H,W) -> encoder tokens (B,T,G,G,D)."""
        if frames.ndim != 4 or frames.shape[1] != self.frames_per_input:
            raise InvalidInput(f"expected (B,{self.frames_per_input},H,W) frames, got {frames.shape}")
        if frames.shape[2] != self.resolution or frames.shape[3] != self.resolution:
            raise InvalidInput(f"expected {self.resolution}px frames, got {frames.shape}")
        w = self.weights
        X = self.patchify(self._normalize(frames))
        Z0 = X @ w["w_embed"] + w["b_embed"]
        Z0 = Z0 + self.pos_encoding[None, None] + self.frame_encoding[None, :, None, None, :]
        H1 = np.tanh(Z0 @ w["w_enc1"] + w["b_enc1"])
        H2 = np.tanh(H1 @ w["w_enc2"] + w["b_enc2"])
        M1 = _mix_rows(w["mix_row"], H2)
        M2 = _mix_cols(w["mix_col"], M1)
        E = _mix_frames(w["mix_frame"], M2)
        if cache is not None:
            cache.update(X=X, Z0=Z0, H1=H1, H2=H2, M1=M1, M2=M2, E=E)
        return E

    def decode(self, E: np.ndarray, cache: dict | None = None) -> np.ndarray:
        """Encoder tokens -> reconstructed frames (B,T,H,W)."""
        w = self.weights
        D1 = _mix_rows(w["dec_row"], E)
        D2 = _mix_cols(w["dec_col"], D1)
        D3 = _mix_frames(w["dec_frame"], D2)
        G1 = np.tanh(D3 @ w["w_dec1"] + w["b_dec1"])
        G2 = np.tanh(G1 @ w["w_dec2"] + w["b_dec2"])
        patches = G2 @ w["w_out"] + w["b_out"]
        if cache is not None:
            cache.update(D1=D1, D2=D2, D3=D3, G1=G1, G2=G2)
        return self.unpatchify(patches)

    def heatmap_head(self, E: np.ndarray, cache: dict | None = None) -> np.ndarray:
        """Encoder tokens -> (B,K,H,W) heatmaps decoded from the last frame."""
        w = self.weights
        E_last = E[:, -1]
        Hlow = E_last @ w["w_kp"] + w["b_kp"]              # (B,G,G,K)
        R = self.upsample
        up_rows = np.einsum("oi,bijk->bojk", R, Hlow, optimize=True)
        Hup = np.einsum("pj,bojk->bopk", R, up_rows, optimize=True)   # (B,H,W,K)
        if cache is not None:
            cache.update(E_last=E_last, Hlow=Hlow, up_rows=up_rows)
        return np.moveaxis(Hup, -1, 1)

    # --- losses with gradients --------------------------------------------

    def loss_reconstruction(
        self, masked_frames: np.ndarray, target_frames: np.ndarray, with_grads: bool = True
    ) -> tuple[float, dict[str, np.ndarray] | None, np.ndarray]:
        """Mean squared error over all pixels of all frames.

        Input and target are depth in meters; the loss operates in the
        scaled network units. Returns (loss, grads or None, reconstruction
        in network units).
        """
        w = self.weights
        cache: dict = {}
        E = self.encode(masked_frames, cache)
        recon = self.decode(E, cache)
        diff = recon - self._normalize(target_frames)
        n = diff.size
        loss = float((diff.astype(np.float64) ** 2).sum() / n)
        if not with_grads:
            return loss, None, recon

        g: dict[str, np.ndarray] = {}
        dRecon = (2.0 / n) * diff
        dPatches = self.patchify(dRecon)
        G1, G2, D3, D2, D1 = cache["G1"], cache["G2"], cache["D3"], cache["D2"], cache["D1"]
        g["w_out"] = _flat_outer(G2, dPatches)
        g["b_out"] = dPatches.sum(axis=(0, 1, 2, 3))
        dG2 = dPatches @ w["w_out"].T
        dG2 = dG2 * (1.0 - G2 * G2)
        g["w_dec2"] = _flat_outer(G1, dG2)
        g["b_dec2"] = dG2.sum(axis=(0, 1, 2, 3))
        dG1 = dG2 @ w["w_dec2"].T
        dG1 = dG1 * (1.0 - G1 * G1)
        g["w_dec1"] = _flat_outer(D3, dG1)
        g["b_dec1"] = dG1.sum(axis=(0, 1, 2, 3))
        dD3 = dG1 @ w["w_dec1"].T
        dE = self._mix_backward(g, dD3, cache["E"], D1, D2, "dec_row", "dec_col", "dec_frame")
        self._encoder_backward(g, dE, cache)
        return loss, g, recon

    def loss_keypoints(
        self, frames: np.ndarray, target_heatmaps: np.ndarray, with_grads: bool = True
    ) -> tuple[float, dict[str, np.ndarray] | None, np.ndarray]:
        """Mean squared error between predicted and target heatmap stacks."""
        if target_heatmaps.shape[1] != self.n_channels:
            raise SchemaMismatch(
                f"target has {target_heatmaps.shape[1]} channels, model emits {self.n_channels}"
            )
        w = self.weights
        cache: dict = {}
        E = self.encode(frames, cache)
        pred = self.heatmap_head(E, cache)
        diff = pred - target_heatmaps
        n = diff.size
        loss = float((diff.astype(np.float64) ** 2).sum() / n)
        if not with_grads:
            return loss, None, pred

        g: dict[str, np.ndarray] = {}
        R = self.upsample
        dHup = np.moveaxis((2.0 / n) * diff, 1, -1)        # (B,H,W,K)
        d_up_rows = np.einsum("pj,bopk->bojk", R, dHup, optimize=True)
        dHlow = np.einsum("oi,bojk->bijk", R, d_up_rows, optimize=True)
        E_last = cache["E_last"]
        g["w_kp"] = _flat_outer(E_last, dHlow)
        g["b_kp"] = dHlow.sum(axis=(0, 1, 2))
        dE = np.zeros_like(cache["E"])
        dE[:, -1] = dHlow @ w["w_kp"].T
        for name in ("dec_row", "dec_col", "dec_frame", "w_dec1", "b_dec1", "w_dec2", "b_dec2", "w_out", "b_out"):
            g[name] = np.zeros_like(w[name])
        self._encoder_backward(g, dE, cache)
        return loss, g, pred

    def _mix_backward(self, g, dOut, X, X1, X2, name_row, name_col, name_frame):
        """Backward through the staged (row, col, frame) mixing."""
        w = self.weights
        g[name_frame] = _axis_outer(dOut, X2, axis=1)
        dX2 = _mix_frames(w[name_frame].T, dOut)
        g[name_col] = _axis_outer(dX2, X1, axis=3)
        dX1 = _mix_cols(w[name_col].T, dX2)
        g[name_row] = _axis_outer(dX1, X, axis=2)
        return _mix_rows(w[name_row].T, dX1)

    def _encoder_backward(self, g, dE, cache):
        w = self.weights
        X, H1, H2, M1, M2 = cache["X"], cache["H1"], cache["H2"], cache["M1"], cache["M2"]
        dH2 = self._mix_backward(g, dE, H2, M1, M2, "mix_row", "mix_col", "mix_frame")
        dH2 = dH2 * (1.0 - H2 * H2)
        g["w_enc2"] = _flat_outer(H1, dH2)
        g["b_enc2"] = dH2.sum(axis=(0, 1, 2, 3))
        dH1 = dH2 @ w["w_enc2"].T
        dH1 = dH1 * (1.0 - H1 * H1)
        g["w_enc1"] = _flat_outer(cache["Z0"], dH1)
        g["b_enc1"] = dH1.sum(axis=(0, 1, 2, 3))
        dZ0 = dH1 @ w["w_enc1"].T
        g["w_embed"] = _flat_outer(X, dZ0)
        g["b_embed"] = dZ0.sum(axis=(0, 1, 2, 3))

    # --- inference ---------------------------------------------------------

    def infer_heatmaps(self, frames: np.ndarray) -> np.ndarray:
        """(t,H,W) frames -> (K,H,W) heatmaps; pads by repeating the last frame."""
        frames = np.asarray(frames, dtype=self.weights["w_embed"].dtype)
        if frames.ndim == 2:
            frames = frames[None]
        if frames.ndim != 3:
            raise InvalidInput(f"expected (t,H,W) frames, got shape {frames.shape}")
        if frames.shape[1] != self.resolution or frames.shape[2] != self.resolution:
            raise InvalidInput(f"expected {self.resolution}px frames, got {frames.shape}")
        T = self.frames_per_input
        if frames.shape[0] > T:
            raise InvalidInput(f"model takes at most {T} frames, got {frames.shape[0]}")
        if frames.shape[0] < T:
            pad = np.repeat(frames[-1:], T - frames.shape[0], axis=0)
            frames = np.concatenate([frames, pad], axis=0)
        E = self.encode(frames[None])
        out = self.heatmap_head(E)[0]
        if not np.isfinite(out).all():
            raise InvalidInput("non-finite heatmap output")
        return out
