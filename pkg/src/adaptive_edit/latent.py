"""Latent grids, seeded noise, the flow-matching interpolant and time schedules.

Latent frames are float64 arrays of shape ``(C, h, w)``; a stack of frames is
``(F, C, h, w)``. Plain ndarrays are used everywhere; the helpers below only
validate and coerce.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError

__all__ = [
    "NoiseSource",
    "TimeSchedule",
    "as_frame",
    "as_stack",
    "derive_seed",
    "interpolate_latent",
    "make_schedule",
    "sample_noise",
]

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / float(1 << 53)


def as_frame(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 3 or min(a.shape) < 1:
        raise DimensionError(f"latent frame must be (C, h, w) with positive sizes, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("latent frame contains non-finite values")
    return a


def as_stack(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 4 or min(a.shape) < 1:
        raise DimensionError(f"latent stack must be (F, C, h, w) with positive sizes, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("latent stack contains non-finite values")
    return a


# --------------------------------------------------------------------------
# Counter-based noise
# --------------------------------------------------------------------------

def _mix64_scalar(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def _mix64(x: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64 without warnings
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    return x ^ (x >> np.uint64(31))


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed with the SplitMix64 finalizer."""
    h = 0
    for p in parts:
        h = _mix64_scalar(h ^ ((int(p) + _GAMMA) & _MASK64))
    return h


class NoiseSource:
    """Deterministic counter-based generator.

    Word ``i`` of the stream is the SplitMix64 finalizer applied to
    ``key + (i + 1) * 0x9E3779B97F4A7C15 (mod 2**64)`` where ``key`` is the
    finalized seed. Uniforms take the top 53 bits of a word. Normals use the
    Box-Muller transform on consecutive word pairs ``(2j, 2j+1)`` and emit
    both the cosine and sine branch, in that order. Only integer arithmetic,
    ``log``, ``sqrt``, ``cos`` and ``sin`` are involved, so any IEEE-754
    platform yields the same bits.

    A source is single-owner: draws advance ``position``.
    """

    def __init__(self, seed: int, position: int = 0):
        self.seed = int(seed) & _MASK64
        self.position = int(position)
        self._key = _mix64_scalar(self.seed)

    def __repr__(self) -> str:
        return f"NoiseSource(seed={self.seed}, position={self.position})"

    def fork(self, tag: int) -> NoiseSource:
        """Independent stream keyed on (seed, tag); leaves this source untouched."""
        return NoiseSource(derive_seed(self.seed, tag))

    def _words(self, n: int) -> np.ndarray:
        idx = np.arange(self.position + 1, self.position + 1 + n, dtype=np.uint64)
        self.position += n
        return _mix64(np.uint64(self._key) + idx * np.uint64(_GAMMA))

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """``n`` uniforms on ``[low, high)``."""
        u = (self._words(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        return low + (high - low) * u

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        w = self._words(2 * pairs)
        u1 = ((w[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53  # (0, 1]
        u2 = (w[1::2] >> np.uint64(11)).astype(np.float64) * _INV_2_53  # [0, 1)
        radius = np.sqrt(-2.0 * np.log(u1))
        theta = _TWO_PI * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(theta)
        out[1::2] = radius * np.sin(theta)
        return out[:n]


def sample_noise(source: NoiseSource, frames: int, channels: int, height: int, width: int) -> np.ndarray:
    """Standard-normal latent stack of shape ``(frames, channels, height, width)``."""
    shape = (frames, channels, height, width)
    if min(shape) < 1:
        raise ConfigurationError(f"noise dimensions must be positive, got {shape}")
    return source.normal(int(np.prod(shape))).reshape(shape)


# --------------------------------------------------------------------------
# Interpolant and schedule
# --------------------------------------------------------------------------

def interpolate_latent(z0, eps, t: float) -> np.ndarray:
    """Point ``(1 - t) * z0 + t * eps`` on the straight noise/data path."""
    z0 = np.asarray(z0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if z0.shape != eps.shape:
        raise DimensionError(f"shape mismatch: {z0.shape} vs {eps.shape}")
    if not 0.0 <= t <= 1.0:
        raise ConfigurationError(f"t must lie in [0, 1], got {t}")
    return (1.0 - t) * z0 + t * eps


@dataclass(frozen=True)
class TimeSchedule:
    steps: tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(x) for x in self.steps)
        object.__setattr__(self, "steps", s)
        if len(s) < 2:
            raise ConfigurationError("a schedule needs at least two time points")
        if not 0.0 < s[0] <= 1.0 or not 0.0 <= s[-1] < s[0]:
            raise ConfigurationError(f"schedule endpoints out of range: {s[0]} .. {s[-1]}")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ConfigurationError("schedule must be strictly decreasing")

    @property
    def n_steps(self) -> int:
        return len(self.steps) - 1

    @property
    def t_max(self) -> float:
        return self.steps[0]

    @property
    def t_min(self) -> float:
        return self.steps[-1]

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    def __iter__(self):
        return iter(self.steps)


def make_schedule(n_steps: int, t_max: float = 1.0, t_min: float = 0.0) -> TimeSchedule:
    """Uniformly spaced schedule of ``n_steps + 1`` points from ``t_max`` down to ``t_min``."""
    if int(n_steps) != n_steps or n_steps < 1:
        raise ConfigurationError(f"number of steps must be a positive integer, got {n_steps}")
    if not 0.0 <= t_min < t_max <= 1.0:
        raise ConfigurationError(f"need 0 <= t_min < t_max <= 1, got t_min={t_min}, t_max={t_max}")
    n = int(n_steps)
    steps = [(t_max * (n - i) + t_min * i) / n for i in range(n + 1)]
    steps[0], steps[-1] = float(t_max), float(t_min)
    return TimeSchedule(tuple(steps))
