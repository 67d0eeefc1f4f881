"""Desk-scale quality proxies for an edit result."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..sampler import EditResult
from ..toy import Scenario

__all__ = ["Metrics", "evaluate_edit", "mask_iou"]


@dataclass(frozen=True)
class Metrics:
    edit_mse: float
    preserve_mse: float
    mask_iou: float
    frame_steps: int


def mask_iou(mask: np.ndarray, region: np.ndarray) -> float:
    """IoU of ``{mask > 0.5}`` against a boolean region (1.0 when both are empty)."""
    pred = np.asarray(mask) > 0.5
    region = np.asarray(region, dtype=bool)
    if pred.shape != region.shape:
        raise DimensionError(f"mask {pred.shape} vs region {region.shape}")
    union = np.count_nonzero(pred | region)
    if union == 0:
        return 1.0
    return np.count_nonzero(pred & region) / union


def _region_mse(a: np.ndarray, b: np.ndarray, region: np.ndarray) -> float:
    if not region.any():
        return 0.0
    d = (a - b)[:, region]
    return float(np.mean(d * d))


def evaluate_edit(result: EditResult, scenario: Scenario) -> Metrics:
    final = result.final_frame
    if final.shape != scenario.reference.shape:
        raise DimensionError(f"result {final.shape} vs scenario {scenario.reference.shape}")
    region = scenario.gt_region
    return Metrics(
        edit_mse=_region_mse(final, scenario.edited, region),
        preserve_mse=_region_mse(final, scenario.reference, ~region),
        mask_iou=mask_iou(result.mask, region),
        frame_steps=result.cost.total,
    )
