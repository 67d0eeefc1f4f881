"""Adaptive reasoning-depth scheduling for flow-matching edit samplers."""
from .card import (
    PAPER_LEVELS,
    Complexity,
    ComplexityDistribution,
    ComplexityLevels,
    KeywordPredictor,
    Lexicon,
    ReasoningConfig,
    allocate,
    classify_instruction,
    default_lexicon,
    load_lexicon,
)
from .latent import NoiseSource, TimeSchedule, interpolate_latent, make_schedule, sample_noise
from .rpfi import ReferenceNoiseCache, RpfiParams, inject, noised_reference, relaxed_mask
from .sampler import Backbone, CostLedger, EditOptions, EditResult, euler_step, run_baseline, run_edit
from .srm import AttentionMaps, SrmParams, aggregate_attention, blur_mask, compute_srm, mask_coverage, threshold_mask
from .toy import AttentionParams, OracleBackbone, PerturbedBackbone, Scenario, ScenarioSpec, make_scenario, oracle_velocity, synth_attention

__version__ = "0.1.0"

__all__ = [
    "AttentionMaps",
    "AttentionParams",
    "Backbone",
    "Complexity",
    "ComplexityDistribution",
    "ComplexityLevels",
    "CostLedger",
    "EditOptions",
    "EditResult",
    "KeywordPredictor",
    "Lexicon",
    "NoiseSource",
    "OracleBackbone",
    "PAPER_LEVELS",
    "PerturbedBackbone",
    "ReasoningConfig",
    "ReferenceNoiseCache",
    "RpfiParams",
    "Scenario",
    "ScenarioSpec",
    "SrmParams",
    "TimeSchedule",
    "aggregate_attention",
    "allocate",
    "blur_mask",
    "classify_instruction",
    "compute_srm",
    "default_lexicon",
    "euler_step",
    "inject",
    "interpolate_latent",
    "load_lexicon",
    "make_scenario",
    "make_schedule",
    "mask_coverage",
    "noised_reference",
    "oracle_velocity",
    "relaxed_mask",
    "run_baseline",
    "run_edit",
    "sample_noise",
    "synth_attention",
    "threshold_mask",
]
