"""Closed-form oracle backbone and synthetic edit scenarios.

The oracle knows the per-frame endpoint of every trajectory, so it can return
the exact conditional velocity ``(z - target) / t``. One Euler step from any
``z`` at time ``t`` then lands on ``(t'/t) z + (1 - t'/t) target``, and a
final step to ``t = 0`` lands on the target itself.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backbone import Backbone
from .errors import ConfigurationError, DimensionError
from .latent import NoiseSource, derive_seed
from .srm import AttentionMaps

__all__ = [
    "AttentionParams",
    "EDIT_KINDS",
    "OracleBackbone",
    "PerturbedBackbone",
    "Scenario",
    "ScenarioSpec",
    "make_scenario",
    "oracle_velocity",
    "synth_attention",
]

EDIT_KINDS = ("region-recolor", "region-replace", "global-shift")


@dataclass(frozen=True)
class ScenarioSpec:
    channels: int = 4
    height: int = 16
    width: int = 16
    kind: str = "region-recolor"
    # half-open box (row0, col0, row1, col1); ignored for global-shift
    region: tuple[int, int, int, int] = (4, 4, 12, 12)
    magnitude: float = 1.0
    instruction: str = "change the hat to a red cap"
    expected_complexity: str = "low"
    name: str = "scenario"


@dataclass(frozen=True)
class Scenario:
    name: str
    reference: np.ndarray
    edited: np.ndarray
    gt_region: np.ndarray
    instruction: str
    expected_complexity: str
    kind: str

    def targets(self, n_frames: int) -> np.ndarray:
        """Per-frame endpoints: reference first, edit last, linear blends between."""
        if n_frames < 2:
            raise ConfigurationError("a trajectory needs at least two frames")
        w = np.arange(n_frames, dtype=np.float64) / (n_frames - 1)
        delta = self.edited - self.reference
        out = self.reference[None] + w[:, None, None, None] * delta[None]
        out[-1] = self.edited
        return out

    @property
    def grid(self) -> tuple[int, int]:
        return self.gt_region.shape


def make_scenario(spec: ScenarioSpec, seed: int = 0) -> Scenario:
    if spec.kind not in EDIT_KINDS:
        raise ConfigurationError(f"unknown edit kind {spec.kind!r}; expected one of {EDIT_KINDS}")
    C, h, w = spec.channels, spec.height, spec.width
    if min(C, h, w) < 1:
        raise ConfigurationError(f"grid dimensions must be positive, got {(C, h, w)}")
    region = np.zeros((h, w), dtype=bool)
    if spec.kind == "global-shift":
        region[:] = True
    else:
        r0, c0, r1, c1 = spec.region
        if not (0 <= r0 < r1 <= h and 0 <= c0 < c1 <= w):
            raise ConfigurationError(f"region {spec.region} does not fit a {h}x{w} grid")
        region[r0:r1, c0:c1] = True
    reference = NoiseSource(seed).normal(C * h * w).reshape(C, h, w)
    edited = reference + spec.magnitude * region[None].astype(np.float64)
    reference.flags.writeable = False
    edited.flags.writeable = False
    region.flags.writeable = False
    return Scenario(spec.name, reference, edited, region, spec.instruction, spec.expected_complexity, spec.kind)


def oracle_velocity(z: np.ndarray, t: float, targets: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != targets.shape:
        raise DimensionError(f"stack {z.shape} does not match targets {targets.shape}")
    if t == 0:
        return np.zeros_like(z)
    return (z - targets) / t


@dataclass(frozen=True)
class AttentionParams:
    signal: float = 1.0
    noise: float = 0.05
    tokens: int = 4
    heads: int = 2

    def __post_init__(self):
        if self.signal < 0 or self.noise < 0:
            raise ConfigurationError("attention signal and noise levels must be non-negative")
        if self.tokens < 1 or self.heads < 1:
            raise ConfigurationError("attention needs at least one token and one head")


def synth_attention(scenario: Scenario, params: AttentionParams = AttentionParams(), seed: int = 0,
                    frames: int = 1, layer: int = 0) -> AttentionMaps:
    """``signal * region + U[0, noise]`` per token/head/frame; constant for global edits."""
    h, w = scenario.grid
    shape = (params.tokens, params.heads, frames, h, w)
    if scenario.kind == "global-shift":
        return AttentionMaps(np.full(shape, params.signal), layer)
    base = params.signal * scenario.gt_region.astype(np.float64)
    jitter = NoiseSource(seed).uniform(int(np.prod(shape)), 0.0, params.noise).reshape(shape)
    return AttentionMaps(base + jitter, layer)


class OracleBackbone(Backbone):
    provides_attention = True

    def __init__(self, scenario: Scenario, attention: AttentionParams = AttentionParams(),
                 attention_seed: int = 0, layer: int = 12):
        self.scenario = scenario
        self.attention = attention
        self.attention_seed = attention_seed
        self.attention_layer = layer

    def evaluate(self, z, t, instruction, reference, want_attention=False):
        z = np.asarray(z, dtype=np.float64)
        if z.shape[1:] != self.scenario.reference.shape:
            raise DimensionError(f"stack frames {z.shape[1:]} do not match scenario {self.scenario.reference.shape}")
        v = oracle_velocity(z, t, self.scenario.targets(len(z)))
        attn = None
        if want_attention:
            attn = synth_attention(self.scenario, self.attention, self.attention_seed, len(z), self.attention_layer)
        return v, attn


class PerturbedBackbone(Backbone):
    """Under-confident oracle plus a drift that acts only while reasoning frames are present.

    The velocity is ``trust * v_oracle + strength * (F - 2) / F * g_f`` with
    ``g`` a seeded standard-normal field per frame. With ``trust < 1`` every
    step keeps a fraction of the current deviation from the target, so
    whatever happens during the reasoning stage leaves a residue in the final
    frame, including outside the edit region. This stands in for the identity
    drift of joint denoising. ``trust = 1`` and ``strength = 0`` give back the
    oracle exactly.
    """

    def __init__(self, base: Backbone, strength: float = 0.5, seed: int = 0, trust: float = 0.9):
        if strength < 0:
            raise ConfigurationError(f"drift strength must be non-negative, got {strength}")
        if not 0.0 < trust <= 1.0:
            raise ConfigurationError(f"trust must be in (0, 1], got {trust}")
        self.base = base
        self.strength = strength
        self.seed = seed
        self.trust = trust
        self.provides_attention = base.provides_attention
        self.attention_layer = base.attention_layer

    def evaluate(self, z, t, instruction, reference, want_attention=False):
        v, attn = self.base.evaluate(z, t, instruction, reference, want_attention)
        if self.trust != 1.0:
            v = self.trust * v
        F = len(z)
        if F > 2 and self.strength:
            g = NoiseSource(derive_seed(self.seed, F)).normal(v.size).reshape(v.shape)
            g[0] = 0.0
            v = v + self.strength * (F - 2) / F * g
        return v, attn
