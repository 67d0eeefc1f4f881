"""Instruction-conditioned spatial masks from cross-attention.

Pipeline: average the attention over tokens, heads and frames, squash around
the spatial mean with a temperature-scaled sigmoid, then smooth with a
separable Gaussian blur (replicate borders).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backbone import Backbone
from .errors import CapabilityError, ConfigurationError, DimensionError, InputError
from .latent import NoiseSource, as_frame, sample_noise

__all__ = [
    "AttentionMaps",
    "SrmParams",
    "aggregate_attention",
    "blur_mask",
    "compute_srm",
    "gaussian_kernel",
    "mask_coverage",
    "threshold_mask",
]


@dataclass(frozen=True)
class AttentionMaps:
    """Non-negative cross-attention weights indexed ``[token, head, frame, h, w]``."""

    weights: np.ndarray
    layer: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 5:
            raise DimensionError(f"attention weights must be 5-D [token, head, frame, h, w], got {w.shape}")
        if w.size == 0:
            raise InputError("attention map is empty")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("attention weights must be finite and non-negative")
        object.__setattr__(self, "weights", w)

    @property
    def tokens(self) -> int:
        return self.weights.shape[0]

    @property
    def heads(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class SrmParams:
    tau: float = 0.1
    kernel: int = 5

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        _check_kernel(self.kernel)


def _check_kernel(k: int) -> None:
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ConfigurationError(f"blur kernel must be a positive odd integer, got {k}")


def aggregate_attention(attn: AttentionMaps) -> np.ndarray:
    """Mean over tokens, heads and frames; shape ``(h, w)``."""
    return attn.weights.mean(axis=(0, 1, 2))


def threshold_mask(raw: np.ndarray, tau: float) -> np.ndarray:
    if not tau > 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    raw = np.asarray(raw, dtype=np.float64)
    x = (raw - raw.mean()) / tau
    # tanh form of the logistic: no overflow, exact 0.5 at x == 0, range [0, 1]
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def gaussian_kernel(k: int) -> np.ndarray:
    """Normalized 1-D kernel of width ``k`` with sigma ``(k - 1) / 4``."""
    _check_kernel(k)
    if k == 1:
        return np.ones(1)
    sigma = (k - 1) / 4.0
    x = np.arange(k, dtype=np.float64) - (k - 1) / 2
    g = np.exp(-0.5 * (x / sigma) ** 2)
    return g / g.sum()


def _blur_axis(a: np.ndarray, g: np.ndarray, axis: int) -> np.ndarray:
    half = len(g) // 2
    pad = [(0, 0)] * a.ndim
    pad[axis] = (half, half)
    p = np.pad(a, pad, mode="edge")
    n = a.shape[axis]
    # accumulate deviations from the centre value so constant regions stay bit-exact
    out = a.copy()
    for i, w in enumerate(g):
        if i != half:
            out += w * (np.take(p, np.arange(i, i + n), axis=axis) - a)
    return out


def blur_mask(mask: np.ndarray, k: int = 5) -> np.ndarray:
    g = gaussian_kernel(k)
    mask = np.asarray(mask, dtype=np.float64)
    if k == 1:
        return mask.copy()
    out = _blur_axis(_blur_axis(mask, g, 0), g, 1)
    return np.clip(out, 0.0, 1.0)


def mask_coverage(mask: np.ndarray) -> float:
    return float(np.mean(mask))


def compute_srm(
    backbone: Backbone,
    instruction: str,
    reference,
    t_max: float,
    params: SrmParams = SrmParams(),
    noise: NoiseSource | None = None,
    ledger=None,
) -> np.ndarray:
    """Run the single pilot evaluation at ``t_max`` and build the blurred mask.

    The pilot stack is the reference plus one noise frame. If ``ledger`` is
    given, its ``pilot`` frame-step count is incremented by the stack size.
    """
    if not backbone.provides_attention:
        raise CapabilityError(f"{type(backbone).__name__} does not expose attention maps")
    reference = as_frame(reference)
    noise = noise if noise is not None else NoiseSource(0)
    eps = sample_noise(noise, 1, *reference.shape)
    stack = np.concatenate([reference[None], eps], axis=0)
    _, attn = backbone.evaluate(stack, t_max, instruction, reference, want_attention=True)
    if attn is None:
        raise CapabilityError(f"{type(backbone).__name__} returned no attention maps")
    if ledger is not None:
        ledger.pilot += len(stack)
    raw = aggregate_attention(attn)
    if raw.shape != reference.shape[1:]:
        raise DimensionError(f"attention grid {raw.shape} does not match latent grid {reference.shape[1:]}")
    return blur_mask(threshold_mask(raw, params.tau), params.kernel)
