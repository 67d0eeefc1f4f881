"""Run every (scenario, configuration) pair and aggregate per complexity bucket."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from ..card import KeywordPredictor, Lexicon
from ..latent import derive_seed
from ..rpfi import RpfiParams
from ..sampler import EditOptions, run_baseline, run_edit
from ..backbone import Backbone
from ..toy import OracleBackbone, PerturbedBackbone, Scenario, make_scenario
from .config import BUCKETS, RunConfig, ScenarioEntry, SuiteConfig
from .metrics import Metrics, evaluate_edit

__all__ = ["BucketSummary", "Report", "Row", "prepare", "run_one", "run_suite", "safe_run"]

logger = logging.getLogger(__name__)

# seed-derivation tags
_REF_TAG, _ATTN_TAG, _RUN_TAG, _DRIFT_TAG = 1, 2, 3, 4


@dataclass(frozen=True)
class Row:
    scenario: str
    bucket: str
    config: str
    metrics: Metrics | None
    predicted: str | None = None
    n_r: int | None = None
    r: int | None = None
    error: str | None = None


@dataclass(frozen=True)
class BucketSummary:
    config: str
    bucket: str  # "all" for the weighted aggregate
    count: int
    failed: int
    edit_mse: float | None
    preserve_mse: float | None
    mask_iou: float | None
    frame_steps: Fraction | None
    speedup: Fraction | None


@dataclass
class Report:
    rows: list[Row] = field(default_factory=list)
    buckets: list[BucketSummary] = field(default_factory=list)
    # expected bucket -> predicted bucket -> count
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    baseline: str | None = None
    weights: dict[str, float] = field(default_factory=dict)

    @property
    def failures(self) -> list[Row]:
        return [r for r in self.rows if r.error is not None]

    @property
    def classification_accuracy(self) -> float | None:
        total = sum(sum(d.values()) for d in self.confusion.values())
        if not total:
            return None
        return sum(self.confusion.get(b, {}).get(b, 0) for b in BUCKETS) / total

    def summary(self, config: str, bucket: str) -> BucketSummary:
        for s in self.buckets:
            if s.config == config and s.bucket == bucket:
                return s
        raise KeyError((config, bucket))


def prepare(entry: ScenarioEntry, cfg: SuiteConfig) -> tuple[Scenario, Backbone, int]:
    """Scenario, backbone and sampler seed for one entry, all derived from the suite seed."""
    p = cfg.params
    scenario = make_scenario(entry.spec, derive_seed(p.seed, entry.seed, _REF_TAG))
    backbone = OracleBackbone(scenario, cfg.attention, derive_seed(p.seed, entry.seed, _ATTN_TAG), p.layer)
    if p.backbone == "perturbed":
        backbone = PerturbedBackbone(backbone, p.drift, derive_seed(p.seed, entry.seed, _DRIFT_TAG), p.trust)
    return scenario, backbone, derive_seed(p.seed, entry.seed, _RUN_TAG)


def run_one(entry: ScenarioEntry, rc: RunConfig, cfg: SuiteConfig, lexicon: Lexicon) -> Row:
    p = cfg.params
    scenario, backbone, run_seed = prepare(entry, cfg)
    if rc.kind == "baseline":
        result = run_baseline(backbone, scenario.reference, scenario.instruction, p.steps, rc.n_r, rc.r,
                              run_seed, p.t_max, p.t_min)
        predicted = None
    else:
        options = EditOptions(
            n_steps=p.steps, t_max=p.t_max, t_min=p.t_min, seed=run_seed, levels=cfg.levels,
            srm_enabled=rc.srm, srm=cfg.srm_params, rpfi=RpfiParams(rc.rpfi, p.beta),
        )
        result = run_edit(backbone, scenario.reference, scenario.instruction, options, KeywordPredictor(lexicon))
        predicted = result.distribution.argmax().value
    return Row(entry.name, entry.bucket, rc.name, evaluate_edit(result, scenario), predicted,
               result.config.n_r_star, result.config.r_star)


def safe_run(args) -> Row:
    entry, rc, cfg, lexicon = args
    try:
        return run_one(entry, rc, cfg, lexicon)
    except Exception as exc:  # recorded per row, suite continues
        logger.warning("run %s/%s failed: %s", entry.name, rc.name, exc)
        return Row(entry.name, entry.bucket, rc.name, None, error=f"{type(exc).__name__}: {exc}")


def _mean(values):
    return sum(values) / len(values) if values else None


def _aggregate(report: Report, cfg: SuiteConfig) -> None:
    base = next((c.name for c in cfg.configs if c.kind == "baseline"), None)
    report.baseline = base

    means: dict[tuple[str, str], Fraction] = {}
    for rc in cfg.configs:
        for b in BUCKETS:
            rows = [r for r in report.rows if r.config == rc.name and r.bucket == b]
            if not rows:
                continue
            ok = [r.metrics for r in rows if r.metrics is not None]
            fs = Fraction(sum(m.frame_steps for m in ok), len(ok)) if ok else None
            if fs is not None:
                means[rc.name, b] = fs
            report.buckets.append(BucketSummary(
                rc.name, b, len(rows), len(rows) - len(ok),
                _mean([m.edit_mse for m in ok]), _mean([m.preserve_mse for m in ok]),
                _mean([m.mask_iou for m in ok]), fs, None,
            ))

    # weighted over buckets; Fraction(w) is the exact binary value of the weight
    overall: dict[str, Fraction] = {}
    for rc in cfg.configs:
        present = [b for b in BUCKETS if (rc.name, b) in means and cfg.weights.get(b, 0.0) > 0]
        wsum = sum(Fraction(cfg.weights[b]) for b in present)
        if wsum:
            overall[rc.name] = sum(Fraction(cfg.weights[b]) * means[rc.name, b] for b in present) / wsum

    def speedup(bucket, value):
        ref = means.get((base, bucket)) if bucket != "all" else overall.get(base)
        if ref is None or value is None or value == 0:
            return None
        return ref / value

    report.buckets = [
        BucketSummary(**{**s.__dict__, "speedup": speedup(s.bucket, s.frame_steps)})
        for s in report.buckets
    ]
    for rc in cfg.configs:
        rows = [r for r in report.rows if r.config == rc.name]
        ok = [r.metrics for r in rows if r.metrics is not None]
        fs = overall.get(rc.name)
        report.buckets.append(BucketSummary(
            rc.name, "all", len(rows), len(rows) - len(ok),
            _mean([m.edit_mse for m in ok]), _mean([m.preserve_mse for m in ok]),
            _mean([m.mask_iou for m in ok]), fs, speedup("all", fs),
        ))

    adaptive = next((c.name for c in cfg.configs if c.kind == "adaptive"), None)
    if adaptive is not None:
        confusion = {b: {p: 0 for p in BUCKETS} for b in BUCKETS}
        for r in report.rows:
            if r.config == adaptive and r.predicted is not None:
                confusion[r.bucket][r.predicted] += 1
        report.confusion = confusion


def run_suite(cfg: SuiteConfig, jobs: int = 1) -> Report:
    """Execute the suite; rows come back in declaration order whatever ``jobs`` is."""
    lexicon = cfg.lexicon()
    tasks = [(e, rc, cfg, lexicon) for e in cfg.scenarios for rc in cfg.configs]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(safe_run, tasks))
    else:
        rows = [safe_run(t) for t in tasks]
    report = Report(rows=rows, weights=dict(cfg.weights))
    _aggregate(report, cfg)
    return report
