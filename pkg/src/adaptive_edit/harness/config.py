"""Suite configuration files (TOML).

Layout::

    [suite]            # global parameters, all optional
    steps = 30
    t_max = 1.0
    t_min = 0.0
    tau = 0.1
    kernel = 5
    beta = 1.5
    seed = 0
    lexicon = "default"     # or a path, relative to the config file
    layer = 12
    backbone = "oracle"     # or "perturbed"
    drift = 0.5             # perturbed backbone: reasoning-stage drift strength
    trust = 0.9             # perturbed backbone: velocity scale in (0, 1]

    [levels]           # optional, (N_r, r) per complexity level
    low = [3, 2]

    [attention]        # optional synthetic attention parameters
    signal = 1.0
    noise = 0.05
    tokens = 4
    heads = 2

    [weights]          # optional bucket weights for the aggregate row
    low = 0.26

    [[configs]]
    name = "baseline"
    kind = "baseline"       # fixed (n_r, r), no mask
    n_r = 10
    r = 8

    [[configs]]
    name = "card+srm"
    kind = "adaptive"       # budget from the instruction, optional mask/injection
    srm = true
    rpfi = false

    [[scenarios]]
    name = "low-01"
    bucket = "low"          # expected complexity
    instruction = "change the hat to a red cap"
    kind = "region-recolor" # region-recolor | region-replace | global-shift
    grid = [4, 16, 16]      # channels, height, width
    region = [4, 4, 10, 10] # row0, col0, row1, col1 (half-open)
    magnitude = 1.0
    seed = 1

Unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..card import Complexity, ComplexityLevels, Lexicon, default_lexicon, load_lexicon
from ..errors import ConfigurationError
from ..srm import SrmParams
from ..toy import EDIT_KINDS, AttentionParams, ScenarioSpec

__all__ = ["RunConfig", "ScenarioEntry", "SuiteConfig", "SuiteParams", "bundled_config", "load_config", "parse_config"]

BUCKETS = tuple(lv.value for lv in Complexity)
RUN_KINDS = ("baseline", "adaptive")
BACKBONES = ("oracle", "perturbed")


@dataclass(frozen=True)
class SuiteParams:
    steps: int = 30
    t_max: float = 1.0
    t_min: float = 0.0
    tau: float = 0.1
    kernel: int = 5
    beta: float = 1.5
    seed: int = 0
    lexicon: str = "default"
    layer: int = 12
    backbone: str = "oracle"
    drift: float = 0.5
    trust: float = 0.9


@dataclass(frozen=True)
class RunConfig:
    name: str
    kind: str = "adaptive"
    n_r: int = 10
    r: int = 8
    srm: bool = True
    rpfi: bool = False


@dataclass(frozen=True)
class ScenarioEntry:
    spec: ScenarioSpec
    bucket: str
    seed: int = 0

    @property
    def name(self) -> str:
        return self.spec.name


@dataclass(frozen=True)
class SuiteConfig:
    scenarios: tuple[ScenarioEntry, ...]
    configs: tuple[RunConfig, ...]
    params: SuiteParams = SuiteParams()
    levels: ComplexityLevels = ComplexityLevels()
    attention: AttentionParams = AttentionParams()
    weights: dict[str, float] = field(default_factory=lambda: {b: 1.0 for b in BUCKETS})
    base_dir: Path = Path(".")

    def __post_init__(self):
        if not self.scenarios:
            raise ConfigurationError("config defines no scenarios")
        if not self.configs:
            raise ConfigurationError("config defines no run configurations")
        for b, w in self.weights.items():
            if w < 0:
                raise ConfigurationError(f"weight for bucket {b!r} is negative")

    @property
    def srm_params(self) -> SrmParams:
        return SrmParams(self.params.tau, self.params.kernel)

    def lexicon(self) -> Lexicon:
        if self.params.lexicon == "default":
            return default_lexicon()
        path = Path(self.params.lexicon)
        if not path.is_absolute():
            path = self.base_dir / path
        return load_lexicon(path)


class _Locator:
    """Best-effort line numbers for validation messages."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def find(self, table: str, index: int | None = None, key: str | None = None) -> int | None:
        header = re.compile(rf"^\s*\[\[\s*{re.escape(table)}\s*\]\]" if index is not None else rf"^\s*\[\s*{re.escape(table)}\s*\]")
        any_header = re.compile(r"^\s*\[")
        seen = -1
        start = None
        for i, line in enumerate(self.lines):
            if header.match(line):
                seen += 1
                if index is None or seen == index:
                    start = i
                    break
        if start is None:
            return None
        if key is None:
            return start + 1
        keyline = re.compile(rf"^\s*{re.escape(key)}\s*=")
        for i in range(start + 1, len(self.lines)):
            if any_header.match(self.lines[i]):
                break
            if keyline.match(self.lines[i]):
                return i + 1
        return start + 1


def _check_keys(table: dict, allowed, where: str, loc: _Locator, table_name: str, index=None):
    for k in table:
        if k not in allowed:
            raise ConfigurationError(f"unknown key {k!r} in {where}", line=loc.find(table_name, index, k))


def _typed(value, typ, where: str, line):
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if typ is int and isinstance(value, bool):
        raise ConfigurationError(f"{where} must be an integer", line=line)
    if not isinstance(value, typ):
        raise ConfigurationError(f"{where} must be {typ.__name__}, got {type(value).__name__}", line=line)
    return value


def _table_fields(cls, table: dict, where: str, loc: _Locator, table_name: str, index=None, skip=()):
    types = {f.name: type(f.default) for f in dataclasses.fields(cls) if f.name not in skip}
    out = {}
    for k, v in table.items():
        if k in skip:
            continue
        out[k] = _typed(v, types[k], f"{where}.{k}", loc.find(table_name, index, k))
    return out


def parse_config(text: str, source: str = "<string>", base_dir: Path | None = None) -> SuiteConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigurationError(f"{source}: {exc}", line=int(m.group(1)) if m else None) from exc
    loc = _Locator(text)
    _check_keys(data, {"suite", "levels", "attention", "weights", "configs", "scenarios"}, "top level", loc, "")

    suite = data.get("suite", {})
    _check_keys(suite, SuiteParams.__dataclass_fields__, "[suite]", loc, "suite")
    params = SuiteParams(**_table_fields(SuiteParams, suite, "suite", loc, "suite"))
    if params.backbone not in BACKBONES:
        raise ConfigurationError(f"suite.backbone must be one of {BACKBONES}", line=loc.find("suite", None, "backbone"))
    try:
        SrmParams(params.tau, params.kernel)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), line=loc.find("suite")) from None
    if params.drift < 0 or not 0.0 < params.trust <= 1.0:
        raise ConfigurationError("suite.drift must be >= 0 and suite.trust in (0, 1]", line=loc.find("suite"))
    if not params.beta > 1.0:
        raise ConfigurationError("suite.beta must exceed 1", line=loc.find("suite", None, "beta"))
    if params.steps < 1 or not 0.0 <= params.t_min < params.t_max <= 1.0:
        raise ConfigurationError("need steps >= 1 and 0 <= t_min < t_max <= 1", line=loc.find("suite"))

    lv_table = data.get("levels", {})
    _check_keys(lv_table, BUCKETS, "[levels]", loc, "levels")
    levels_kw = {}
    for k, v in lv_table.items():
        if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, int) for x in v)):
            raise ConfigurationError(f"levels.{k} must be [n_r, r]", line=loc.find("levels", None, k))
        levels_kw[k] = tuple(v)
    levels = ComplexityLevels(**levels_kw)
    try:
        levels.check_steps(params.steps)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), line=loc.find("levels")) from None

    att_table = data.get("attention", {})
    _check_keys(att_table, AttentionParams.__dataclass_fields__, "[attention]", loc, "attention")
    try:
        attention = AttentionParams(**_table_fields(AttentionParams, att_table, "attention", loc, "attention"))
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), line=loc.find("attention")) from None

    w_table = data.get("weights", {})
    _check_keys(w_table, BUCKETS, "[weights]", loc, "weights")
    weights = {b: 1.0 for b in BUCKETS}
    for k, v in w_table.items():
        line = loc.find("weights", None, k)
        v = _typed(v, float, f"weights.{k}", line)
        if v < 0:
            raise ConfigurationError(f"weight for bucket {k!r} is negative", line=line)
        weights[k] = v

    configs = []
    for i, c in enumerate(data.get("configs", [])):
        _check_keys(c, RunConfig.__dataclass_fields__, f"configs[{i}]", loc, "configs", i)
        if "name" not in c:
            raise ConfigurationError(f"configs[{i}] needs a name", line=loc.find("configs", i))
        kw = _table_fields(RunConfig, c, f"configs[{i}]", loc, "configs", i, skip=("name",))
        rc = RunConfig(name=_typed(c["name"], str, f"configs[{i}].name", loc.find("configs", i, "name")), **kw)
        if rc.kind not in RUN_KINDS:
            raise ConfigurationError(f"configs[{i}].kind must be one of {RUN_KINDS}", line=loc.find("configs", i, "kind"))
        if rc.kind == "baseline" and (rc.n_r < 0 or rc.r < 1 or rc.n_r > params.steps):
            raise ConfigurationError(f"configs[{i}] needs 0 <= n_r <= steps and r >= 1", line=loc.find("configs", i))
        configs.append(rc)
    if len({c.name for c in configs}) != len(configs):
        raise ConfigurationError("configuration names must be unique")

    scenarios = []
    allowed = {"name", "bucket", "instruction", "kind", "grid", "region", "magnitude", "seed"}
    for i, s in enumerate(data.get("scenarios", [])):
        _check_keys(s, allowed, f"scenarios[{i}]", loc, "scenarios", i)
        line = loc.find("scenarios", i)
        for req in ("name", "bucket", "instruction"):
            if req not in s:
                raise ConfigurationError(f"scenarios[{i}] is missing {req!r}", line=line)
        bucket = s["bucket"]
        if bucket not in BUCKETS:
            raise ConfigurationError(f"scenarios[{i}].bucket must be one of {BUCKETS}", line=loc.find("scenarios", i, "bucket"))
        kind = s.get("kind", "region-recolor")
        if kind not in EDIT_KINDS:
            raise ConfigurationError(f"scenarios[{i}].kind must be one of {EDIT_KINDS}", line=loc.find("scenarios", i, "kind"))
        grid = s.get("grid", [4, 16, 16])
        if not (isinstance(grid, list) and len(grid) == 3 and all(isinstance(x, int) and x > 0 for x in grid)):
            raise ConfigurationError(f"scenarios[{i}].grid must be [channels, height, width]", line=loc.find("scenarios", i, "grid"))
        region = s.get("region", [0, 0, grid[1], grid[2]])
        if not (isinstance(region, list) and len(region) == 4 and all(isinstance(x, int) for x in region)):
            raise ConfigurationError(f"scenarios[{i}].region must be [row0, col0, row1, col1]", line=loc.find("scenarios", i, "region"))
        r0, c0, r1, c1 = region
        if kind != "global-shift" and not (0 <= r0 < r1 <= grid[1] and 0 <= c0 < c1 <= grid[2]):
            raise ConfigurationError(f"scenarios[{i}].region {region} is outside the grid", line=loc.find("scenarios", i, "region"))
        spec = ScenarioSpec(
            channels=grid[0], height=grid[1], width=grid[2], kind=kind, region=tuple(region),
            magnitude=_typed(s.get("magnitude", 1.0), float, f"scenarios[{i}].magnitude", loc.find("scenarios", i, "magnitude")),
            instruction=_typed(s["instruction"], str, f"scenarios[{i}].instruction", line),
            expected_complexity=bucket, name=_typed(s["name"], str, f"scenarios[{i}].name", line),
        )
        scenarios.append(ScenarioEntry(spec, bucket, _typed(s.get("seed", i), int, f"scenarios[{i}].seed", line)))
    if len({s.name for s in scenarios}) != len(scenarios):
        raise ConfigurationError("scenario names must be unique")

    return SuiteConfig(tuple(scenarios), tuple(configs), params, levels, attention, weights,
                       base_dir if base_dir is not None else Path("."))


def load_config(path: str | Path) -> SuiteConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, str(path), path.parent)


def bundled_config(name: str = "pilot") -> SuiteConfig:
    """One of the configs shipped in the package data directory."""
    ref = resources.files("adaptive_edit") / "data" / f"{name}.toml"
    if not ref.is_file():
        raise ConfigurationError(f"no bundled config named {name!r}")
    return parse_config(ref.read_text(encoding="utf-8"), f"<bundled {name}>")
