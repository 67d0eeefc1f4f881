"""Command-line entry point.

Subcommands::

    run       execute a suite and write a CSV or JSON report
    edit      run one scenario and print its cost and metrics
    mask      build the spatial mask for one scenario and print its coverage
    classify  print the complexity level and reasoning budget of instructions

Exit codes: 0 success, 1 configuration error, 2 at least one failed run.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .card import KeywordPredictor, allocate, load_lexicon
from .errors import ConfigurationError, InputError
from .harness.config import RunConfig, SuiteConfig, bundled_config, load_config
from .harness.metrics import mask_iou
from .harness.report import emit_report, render_csv, render_json
from .harness.suite import Report, safe_run, prepare, run_suite
from .latent import NoiseSource
from .sampler import PILOT_STREAM
from .srm import compute_srm, mask_coverage

logger = logging.getLogger("adaptive_edit")

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 1, 2


def _load(args) -> SuiteConfig:
    cfg = load_config(args.config) if args.config else bundled_config("pilot")
    params = cfg.params
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "rpfi_beta", None) is not None:
        if not args.rpfi_beta > 1.0:
            raise ConfigurationError("--rpfi-beta must exceed 1")
        changes["beta"] = args.rpfi_beta
    if getattr(args, "lexicon", None):
        changes["lexicon"] = str(Path(args.lexicon).resolve())
    configs = list(cfg.configs)
    nr, r = getattr(args, "baseline_nr", None), getattr(args, "baseline_r", None)
    if nr is not None or r is not None:
        steps = changes.get("steps", params.steps)
        if (nr is not None and not 0 <= nr <= steps) or (r is not None and r < 1):
            raise ConfigurationError("--baseline-nr must be in [0, steps] and --baseline-r >= 1")
        configs = [
            dataclasses.replace(c, n_r=c.n_r if nr is None else nr, r=c.r if r is None else r)
            if c.kind == "baseline" else c
            for c in configs
        ]
    if getattr(args, "rpfi", False) and not any(c.rpfi for c in configs):
        configs.append(RunConfig(name="card+srm+rpfi", kind="adaptive", srm=True, rpfi=True))
    return dataclasses.replace(cfg, params=dataclasses.replace(params, **changes), configs=tuple(configs))


def _pick(cfg: SuiteConfig, name: str | None):
    if name is None:
        return cfg.scenarios[0]
    for e in cfg.scenarios:
        if e.name == name:
            return e
    raise ConfigurationError(f"no scenario named {name!r}; have {[e.name for e in cfg.scenarios]}")


def _print_summary(report: Report, stream) -> None:
    print(f"{'config':<16}{'bucket':<8}{'n':>4}{'frame-steps':>14}{'speedup':>10}"
          f"{'edit_mse':>12}{'preserve_mse':>14}{'mask_iou':>10}", file=stream)
    for s in report.buckets:
        fs = "-" if s.frame_steps is None else f"{float(s.frame_steps):.2f}"
        sp = "-" if s.speedup is None else f"{float(s.speedup):.3f}"
        fmt = lambda x, w: ("-" if x is None else f"{x:.3g}").rjust(w)  # noqa: E731
        print(f"{s.config:<16}{s.bucket:<8}{s.count:>4}{fs:>14}{sp:>10}"
              f"{fmt(s.edit_mse, 12)}{fmt(s.preserve_mse, 14)}{fmt(s.mask_iou, 10)}", file=stream)
    acc = report.classification_accuracy
    if acc is not None:
        print(f"classification accuracy vs expected buckets: {acc:.3f}", file=stream)
    for r in report.failures:
        print(f"FAILED {r.scenario}/{r.config}: {r.error}", file=stream)


def cmd_run(args) -> int:
    cfg = _load(args)
    report = run_suite(cfg, jobs=args.jobs)
    fmt = args.format
    if args.out:
        fmt = fmt or ("json" if Path(args.out).suffix.lower() == ".json" else "csv")
        emit_report(report, fmt, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(render_json(report) if fmt == "json" else render_csv(report))
    if not args.quiet:
        _print_summary(report, sys.stderr)
    return EXIT_RUN if report.failures else EXIT_OK


def cmd_edit(args) -> int:
    cfg = _load(args)
    entry = _pick(cfg, args.scenario)
    if args.baseline:
        rc = next((c for c in cfg.configs if c.kind == "baseline"), RunConfig("baseline", "baseline"))
        if args.baseline_nr is not None or args.baseline_r is not None:
            rc = dataclasses.replace(rc, n_r=rc.n_r if args.baseline_nr is None else args.baseline_nr,
                                     r=rc.r if args.baseline_r is None else args.baseline_r)
    else:
        rc = RunConfig("card+srm+rpfi" if args.rpfi else "card+srm", "adaptive", srm=True, rpfi=args.rpfi)
    row = safe_run((entry, rc, cfg, cfg.lexicon()))
    if row.error is not None:
        print(f"error: {row.error}", file=sys.stderr)
        return EXIT_RUN
    out = {
        "scenario": row.scenario,
        "bucket": row.bucket,
        "config": row.config,
        "predicted": row.predicted,
        "n_r": row.n_r,
        "r": row.r,
        "metrics": dataclasses.asdict(row.metrics),
    }
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_mask(args) -> int:
    cfg = _load(args)
    entry = _pick(cfg, args.scenario)
    scenario, backbone, run_seed = prepare(entry, cfg)
    pilot = NoiseSource(run_seed).fork(PILOT_STREAM)
    mask = compute_srm(backbone, scenario.instruction, scenario.reference, cfg.params.t_max, cfg.srm_params, noise=pilot)
    print(f"scenario {entry.name}: coverage {mask_coverage(mask):.6f}  "
          f"iou {mask_iou(mask, scenario.gt_region):.6f}  grid {mask.shape[0]}x{mask.shape[1]}")
    if args.out:
        np.savetxt(args.out, mask, delimiter=",", fmt="%.9g")
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = load_config(args.config) if args.config else None
    lexicon = load_lexicon(args.lexicon) if args.lexicon else (cfg.lexicon() if cfg else None)
    predictor = KeywordPredictor(lexicon)
    levels = cfg.levels if cfg else None
    for text in args.instruction:
        dist = predictor.predict(text)
        n_r, r = allocate(dist, levels) if levels else allocate(dist)
        print(f"{dist.argmax().value}\t{n_r}\t{r}\t{text}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptive-edit", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, suite=True):
        p.add_argument("--config", help="suite TOML file (default: bundled pilot suite)")
        p.add_argument("--lexicon", help="keyword lexicon file (class<TAB>keyword)")
        if suite:
            p.add_argument("--seed", type=int, help="override the suite seed")
            p.add_argument("--rpfi", action="store_true", help="enable reference injection")
            p.add_argument("--rpfi-beta", type=float, help="injection relaxation factor (> 1, default 1.5)")
            p.add_argument("--baseline-nr", type=int, help="baseline reasoning steps")
            p.add_argument("--baseline-r", type=int, help="baseline reasoning frames")

    p = sub.add_parser("run", help="run a suite")
    common(p)
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="report format (default from --out suffix, else csv)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("-q", "--quiet", action="store_true", help="no summary table on stderr")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("edit", help="run a single scenario")
    common(p)
    p.add_argument("--scenario", help="scenario name (default: first)")
    p.add_argument("--baseline", action="store_true", help="use the fixed baseline schedule")
    p.add_argument("--out", help="also write the JSON result here")
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("mask", help="build the spatial mask only")
    common(p)
    p.add_argument("--scenario", help="scenario name (default: first)")
    p.add_argument("--out", help="write the mask as CSV")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("classify", help="classify instructions")
    common(p, suite=False)
    p.add_argument("instruction", nargs="+")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
