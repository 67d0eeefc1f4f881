"""Two-stage Euler sampler with an adaptive reasoning prefix.

Stage 0 picks the reasoning budget from the instruction and builds the
spatial mask with one pilot evaluation. Stage 1 integrates the stack
``[reference, r* reasoning frames, output frame]`` for ``N_r*`` steps. The
reasoning frames are then dropped and Stage 2 integrates
``[reference, output frame]`` for the remaining steps. The reference slot is
reset to the clean latent after every step.

Compute is accounted in frame-steps: one frame through one backbone call.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .backbone import Backbone
from .card import (
    PAPER_LEVELS,
    ComplexityDistribution,
    ComplexityLevels,
    ComplexityPredictor,
    KeywordPredictor,
    ReasoningConfig,
    allocate,
    make_reasoning_config,
)
from .errors import DimensionError, ScheduleError
from .latent import NoiseSource, as_frame, sample_noise
from .rpfi import ReferenceNoiseCache, RpfiParams, inject, relaxed_mask
from .srm import SrmParams, compute_srm

__all__ = [
    "Backbone",
    "CostLedger",
    "EditOptions",
    "EditResult",
    "euler_step",
    "run_baseline",
    "run_edit",
]

# stream tag for the pilot-pass noise, kept apart from the initialization stream
PILOT_STREAM = 1


@dataclass
class CostLedger:
    pilot: int = 0
    stage1: int = 0
    stage2: int = 0
    # reasoning-stage cost counting only reasoning + output frames (no reference slot)
    stage1_excl_reference: int = 0

    @property
    def total(self) -> int:
        return self.pilot + self.stage1 + self.stage2

    def as_dict(self) -> dict[str, int]:
        return {
            "pilot": self.pilot,
            "stage1": self.stage1,
            "stage2": self.stage2,
            "stage1_excl_reference": self.stage1_excl_reference,
            "total": self.total,
        }


@dataclass
class EditResult:
    final_frame: np.ndarray
    config: ReasoningConfig
    mask: np.ndarray
    cost: CostLedger
    distribution: ComplexityDistribution | None = None
    init_noise: np.ndarray | None = None
    trace: list[np.ndarray] | None = None
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class EditOptions:
    n_steps: int = 30
    t_max: float = 1.0
    t_min: float = 0.0
    seed: int = 0
    levels: ComplexityLevels = PAPER_LEVELS
    srm_enabled: bool = True
    srm: SrmParams = SrmParams()
    rpfi: RpfiParams = RpfiParams()
    # (N_r, r) override that bypasses the predictor
    force_budget: tuple[int, int] | None = None
    keep_trace: bool = False


def euler_step(z: np.ndarray, v: np.ndarray, t: float, t_next: float) -> np.ndarray:
    if not t_next < t:
        raise ScheduleError(f"step must decrease t, got {t} -> {t_next}")
    if np.shape(z) != np.shape(v):
        raise DimensionError(f"velocity shape {np.shape(v)} does not match latent {np.shape(z)}")
    return z + (t_next - t) * v


def _evaluate(backbone: Backbone, z, t, instruction, reference) -> np.ndarray:
    v, _ = backbone.evaluate(z, t, instruction, reference)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != z.shape:
        raise DimensionError(f"backbone returned velocity {v.shape} for stack {z.shape}")
    return v


def _denoise(
    backbone: Backbone,
    z_c: np.ndarray,
    instruction: str,
    config: ReasoningConfig,
    mask: np.ndarray,
    rpfi: RpfiParams,
    noise: NoiseSource,
    ledger: CostLedger,
    trace: list | None,
) -> tuple[np.ndarray, np.ndarray]:
    T = config.schedule
    n_r, r = config.n_r_star, config.r_star
    eps = sample_noise(noise, r + 1, *z_c.shape)
    cache = ReferenceNoiseCache(eps, z_c) if rpfi.enabled else None

    z_full = np.concatenate([z_c[None], eps], axis=0)
    for n in range(n_r):
        v = _evaluate(backbone, z_full, T[n], instruction, z_c)
        ledger.stage1 += len(z_full)
        ledger.stage1_excl_reference += len(z_full) - 1
        z_full = euler_step(z_full, v, T[n], T[n + 1])
        z_full[0] = z_c
        if cache is not None:
            z_full = inject(z_full, cache, relaxed_mask(mask, n, n_r, rpfi.beta), T[n + 1])
        if trace is not None:
            trace.append(z_full.copy())

    z_final = np.stack([z_c, z_full[-1]])
    for n in range(n_r, config.n_steps):
        v = _evaluate(backbone, z_final, T[n], instruction, z_c)
        ledger.stage2 += len(z_final)
        z_final = euler_step(z_final, v, T[n], T[n + 1])
        z_final[0] = z_c
        if trace is not None:
            trace.append(z_final.copy())
    return z_final[-1].copy(), eps


def run_edit(
    backbone: Backbone,
    reference,
    instruction: str,
    options: EditOptions = EditOptions(),
    predictor: ComplexityPredictor | None = None,
) -> EditResult:
    """Adaptive edit: budget from the predictor, mask from a pilot pass, then integrate."""
    z_c = as_frame(reference)
    notes: list[str] = []
    dist = None
    if options.force_budget is not None:
        n_r, r = options.force_budget
    else:
        predictor = predictor or KeywordPredictor()
        dist = predictor.predict(instruction, z_c)
        n_r, r = allocate(dist, options.levels)
    if n_r > options.n_steps:
        msg = f"reasoning steps {n_r} exceed total steps {options.n_steps}; clamped"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
        n_r = options.n_steps
    config = make_reasoning_config(n_r, r, options.n_steps, options.t_max, options.t_min)

    ledger = CostLedger()
    noise = NoiseSource(options.seed)
    if options.srm_enabled:
        mask = compute_srm(
            backbone, instruction, z_c, options.t_max, options.srm,
            noise=noise.fork(PILOT_STREAM), ledger=ledger,
        )
    else:
        mask = np.ones(z_c.shape[1:])

    trace = [] if options.keep_trace else None
    final, eps = _denoise(backbone, z_c, instruction, config, mask, options.rpfi, noise, ledger, trace)
    return EditResult(final, config, mask, ledger, dist, eps, trace, notes)


def run_baseline(
    backbone: Backbone,
    reference,
    instruction: str,
    n_steps: int = 30,
    n_r: int = 10,
    r: int = 8,
    seed: int = 0,
    t_max: float = 1.0,
    t_min: float = 0.0,
    keep_trace: bool = False,
) -> EditResult:
    """Fixed-schedule reference run: no mask, no injection, no pilot pass."""
    options = EditOptions(
        n_steps=n_steps, t_max=t_max, t_min=t_min, seed=seed,
        srm_enabled=False, force_budget=(n_r, r), keep_trace=keep_trace,
    )
    return run_edit(backbone, reference, instruction, options)
