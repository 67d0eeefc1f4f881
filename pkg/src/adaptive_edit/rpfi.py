"""Noise-matched reference injection into the unmasked region.

During the reasoning stage, every non-conditioning frame is blended toward
the reference latent noised to the current level with the *same* noise that
initialized that frame. A ramp keeps injection off at the first step and
brings it to full strength once ``n / N_r >= 1 / beta``.

Disabled by default: in practice it hurts identity preservation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError
from .latent import as_frame, as_stack, interpolate_latent

__all__ = ["ReferenceNoiseCache", "RpfiParams", "inject", "noised_reference", "relaxed_mask"]


@dataclass(frozen=True)
class RpfiParams:
    enabled: bool = False
    beta: float = 1.5

    def __post_init__(self):
        if self.enabled and not self.beta > 1.0:
            raise ConfigurationError(f"relaxation factor must exceed 1, got {self.beta}")


@dataclass(frozen=True)
class ReferenceNoiseCache:
    """Initialization noise (one frame per non-conditioning stack slot) and the clean reference."""

    eps_ref: np.ndarray
    z_c: np.ndarray

    def __post_init__(self):
        eps = as_stack(self.eps_ref).copy()
        z_c = as_frame(self.z_c).copy()
        if eps.shape[1:] != z_c.shape:
            raise DimensionError(f"noise frames {eps.shape[1:]} do not match reference {z_c.shape}")
        eps.flags.writeable = False
        z_c.flags.writeable = False
        object.__setattr__(self, "eps_ref", eps)
        object.__setattr__(self, "z_c", z_c)


def noised_reference(z_c, eps_ref, t_n: float) -> np.ndarray:
    return interpolate_latent(z_c, eps_ref, t_n)


def relaxed_mask(mask: np.ndarray, n: int, n_r: int, beta: float) -> np.ndarray:
    if not 0 <= n < n_r:
        raise IndexError(f"step {n} outside reasoning stage [0, {n_r})")
    if not beta > 1.0:
        raise ConfigurationError(f"relaxation factor must exceed 1, got {beta}")
    alpha = min(1.0, n / n_r * beta)
    return alpha * np.asarray(mask, dtype=np.float64) + (1.0 - alpha)


def inject(z_full: np.ndarray, cache: ReferenceNoiseCache, mask: np.ndarray, t_n: float) -> np.ndarray:
    """Blend frames ``1..F-1`` toward the noised reference; frame 0 is left alone.

    Frame ``f`` is paired with initialization noise frame ``f - 1``.
    """
    z_full = np.asarray(z_full, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != z_full.shape[2:]:
        raise DimensionError(f"mask {mask.shape} does not match latent grid {z_full.shape[2:]}")
    if z_full.shape[1:] != cache.z_c.shape:
        raise DimensionError(f"stack frames {z_full.shape[1:]} do not match reference {cache.z_c.shape}")
    if len(z_full) - 1 > len(cache.eps_ref):
        raise DimensionError(f"stack has {len(z_full) - 1} noisy frames but cache holds {len(cache.eps_ref)}")
    out = z_full.copy()
    m = mask[None]
    for f in range(1, len(z_full)):
        ref = noised_reference(cache.z_c, cache.eps_ref[f - 1], t_n)
        out[f] = m * z_full[f] + (1.0 - m) * ref
    return out
