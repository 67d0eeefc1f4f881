import json
from fractions import Fraction
from textwrap import dedent

import numpy as np
import pytest

from adaptive_edit.card import ReasoningConfig, classify_instruction
from adaptive_edit.errors import ConfigurationError
from adaptive_edit.harness import (
    CSV_HEADER,
    Report,
    bundled_config,
    emit_report,
    evaluate_edit,
    load_config,
    parse_config,
    render_csv,
    render_json,
    run_suite,
)
from adaptive_edit.harness.metrics import mask_iou
from adaptive_edit.latent import make_schedule
from adaptive_edit.sampler import CostLedger, EditResult

MINIMAL = dedent("""
    [[configs]]
    name = "baseline"
    kind = "baseline"

    [[scenarios]]
    name = "only"
    bucket = "low"
    instruction = "make it red"
    grid = [2, 8, 8]
    region = [2, 2, 6, 6]
""")


def _result(final, mask):
    cfg = ReasoningConfig(0, 1, 1, make_schedule(1))
    return EditResult(final, cfg, mask, CostLedger(stage2=2))


class TestConfig:
    def test_minimal_runnable(self):
        cfg = parse_config(MINIMAL)
        assert cfg.params.tau == 0.1 and cfg.params.steps == 30 and cfg.params.beta == 1.5
        report = run_suite(cfg)
        assert len(report.rows) == 1 and not report.failures
        assert report.rows[0].metrics.frame_steps == 140

    def test_negative_weight(self):
        text = MINIMAL + "\n[weights]\nlow = -0.5\n"
        with pytest.raises(ConfigurationError, match="negative") as exc:
            parse_config(text)
        assert exc.value.line == text.splitlines().index("low = -0.5") + 1

    def test_unknown_key(self):
        text = "[suite]\nsteps = 30\ntemperature = 2\n" + MINIMAL
        with pytest.raises(ConfigurationError, match="temperature") as exc:
            parse_config(text)
        assert exc.value.line == 3

    @pytest.mark.parametrize("snippet,match", [
        ("[suite]\ntau = 0.0\n", "tau"),
        ("[suite]\nbeta = 1.0\n", "beta"),
        ("[suite]\nkernel = 4\n", "kernel"),
        ("[suite]\nsteps = 10\n[levels]\nhigh = [15, 8]\n", "steps"),
        ("[suite]\nbackbone = \"gpu\"\n", "backbone"),
    ])
    def test_invalid_values(self, snippet, match):
        with pytest.raises(ConfigurationError, match=match):
            parse_config(snippet + MINIMAL)

    def test_bad_region(self):
        with pytest.raises(ConfigurationError, match="outside"):
            parse_config(MINIMAL.replace("[2, 2, 6, 6]", "[2, 2, 9, 6]"))

    def test_syntax_error_has_line(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("[suite]\nsteps = = 3\n")
        assert exc.value.line == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "nope.toml")

    def test_relative_lexicon(self, tmp_path):
        (tmp_path / "lex.tsv").write_text("low\tred\nmedium\tadd\nhigh\tpaint\n", encoding="utf-8")
        (tmp_path / "s.toml").write_text('[suite]\nlexicon = "lex.tsv"\n' + MINIMAL.replace("make it red", "paint it"))
        cfg = load_config(tmp_path / "s.toml")
        assert classify_instruction("paint it", cfg.lexicon()).argmax().value == "high"

    def test_bundled_pilot(self):
        cfg = bundled_config()
        assert [sum(e.bucket == b for e in cfg.scenarios) for b in ("low", "medium", "high")] == [10, 10, 10]


class TestMetrics:
    def test_exact_result(self, scenario):
        m = evaluate_edit(_result(scenario.edited.copy(), scenario.gt_region.astype(float)), scenario)
        assert m.edit_mse == 0 and m.preserve_mse == 0 and m.mask_iou == 1.0 and m.frame_steps == 2

    def test_reference_result(self, scenario):
        m = evaluate_edit(_result(scenario.reference.copy(), np.zeros(scenario.grid)), scenario)
        assert m.edit_mse == pytest.approx(1.5 ** 2, rel=1e-12)
        assert m.preserve_mse == 0 and m.mask_iou == 0.0

    def test_iou_empty(self):
        assert mask_iou(np.zeros((3, 3)), np.zeros((3, 3), bool)) == 1.0


class TestSuite:
    def test_pilot_costs(self):
        report = run_suite(bundled_config())
        totals = {b: report.summary("card+srm", b).frame_steps for b in ("low", "medium", "high")}
        assert totals == {"low": 68, "medium": 94, "high": 182}
        assert report.summary("baseline", "low").frame_steps == 140
        assert report.summary("card+srm", "high").speedup == Fraction(140, 182)
        assert report.summary("card+srm", "all").speedup == Fraction(140 * 3, 68 + 94 + 182)
        assert report.classification_accuracy == 1.0

    def test_no_edit_preserved(self):
        cfg = parse_config("[suite]\nsteps = 12\n[levels]\nhigh = [9, 4]\n"
                           "[[configs]]\nname='b'\nkind='baseline'\nn_r=5\nr=3\n"
                           "[[configs]]\nname='a'\nrpfi=true\n" + "".join(
                               f"[[scenarios]]\nname='{b}'\nbucket='{b}'\ninstruction='{i}'\nmagnitude=0.0\n"
                               for b, i in [("low", "make it red"), ("medium", "remove the cup"), ("high", "make him jump")]))
        report = run_suite(cfg)
        assert not report.failures
        for r in report.rows:
            assert r.metrics.preserve_mse < 1e-12

    def test_failures_recorded(self, monkeypatch):
        import adaptive_edit.harness.suite as suite
        real = suite.run_one

        def flaky(entry, rc, cfg, lexicon):
            if entry.name == "only" and rc.kind == "adaptive":
                raise RuntimeError("boom")
            return real(entry, rc, cfg, lexicon)

        monkeypatch.setattr(suite, "run_one", flaky)
        cfg = parse_config(MINIMAL + "\n[[configs]]\nname = \"card\"\n")
        report = run_suite(cfg)
        assert [r.error for r in report.rows] == [None, "RuntimeError: boom"]
        assert report.summary("card", "low").failed == 1
        assert render_csv(report).splitlines()[-1] == "only,low,card,,,,"


class TestReport:
    def test_header(self):
        assert render_csv(Report()) == ",".join(CSV_HEADER) + "\n"

    def test_json_roundtrip(self):
        data = json.loads(render_json(run_suite(parse_config(MINIMAL))))
        assert data["rows"][0]["frame_steps"] == 140 and data["failures"] == 0

    def test_byte_identical_and_parallel(self, tmp_path):
        cfg = bundled_config()
        a, b, c = run_suite(cfg), run_suite(cfg), run_suite(cfg, jobs=4)
        assert render_csv(a) == render_csv(b) == render_csv(c)
        assert render_json(a) == render_json(b) == render_json(c)
        p = emit_report(a, "csv", tmp_path / "r.csv")
        assert p.read_bytes() == render_csv(a).encode()

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(Report(), "xml", tmp_path / "r.xml")
