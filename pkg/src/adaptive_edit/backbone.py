"""Velocity-predictor interface consumed by the sampler and the mask pilot pass."""
from __future__ import annotations

import abc
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .srm import AttentionMaps


class Backbone(abc.ABC):
    """A denoiser that predicts the flow-matching velocity for a latent stack.

    Implementations must return a velocity with the same shape as the input
    stack. Those that set ``provides_attention`` also return instruction
    cross-attention maps from layer ``attention_layer`` when asked to.
    Evaluation must not mutate the backbone, so a single instance may be
    shared by concurrent runs.
    """

    provides_attention: bool = False
    attention_layer: int = 0

    @abc.abstractmethod
    def evaluate(
        self,
        z: np.ndarray,
        t: float,
        instruction: str,
        reference: np.ndarray,
        want_attention: bool = False,
    ) -> tuple[np.ndarray, AttentionMaps | None]:
        ...
