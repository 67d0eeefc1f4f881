"""Complexity-adaptive reasoning depth.

An instruction is mapped to a probability triple over three complexity
levels, and the triple is turned into a reasoning budget (steps, frames) by
probability-weighted interpolation of per-level budgets.
"""
from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Protocol

from .errors import ConfigurationError, InputError
from .latent import TimeSchedule, make_schedule

__all__ = [
    "Complexity",
    "ComplexityDistribution",
    "ComplexityLevels",
    "ComplexityPredictor",
    "KeywordPredictor",
    "Lexicon",
    "PAPER_LEVELS",
    "ReasoningConfig",
    "allocate",
    "classify_instruction",
    "default_lexicon",
    "load_lexicon",
    "make_reasoning_config",
]


class Complexity(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


# highest priority first
PRIORITY = (Complexity.HIGH, Complexity.MEDIUM, Complexity.LOW)


@dataclass(frozen=True)
class ComplexityDistribution:
    p_low: float
    p_medium: float
    p_high: float

    def __post_init__(self):
        for name in ("p_low", "p_medium", "p_high"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"{name}={p} outside [0, 1]")
        total = self.p_low + self.p_medium + self.p_high
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"probabilities sum to {total}, expected 1")

    @classmethod
    def one_hot(cls, level: Complexity | str) -> ComplexityDistribution:
        level = Complexity(level)
        return cls(*(1.0 if lv is level else 0.0 for lv in Complexity))

    def __getitem__(self, level: Complexity | str) -> float:
        return getattr(self, f"p_{Complexity(level).value}")

    def argmax(self) -> Complexity:
        # ties resolve toward the higher level
        return max(PRIORITY[::-1], key=lambda lv: self[lv])


@dataclass(frozen=True)
class ComplexityLevels:
    """Per-level reasoning budgets as ``(steps, frames)`` pairs."""

    low: tuple[int, int] = (3, 2)
    medium: tuple[int, int] = (8, 4)
    high: tuple[int, int] = (15, 8)

    def __post_init__(self):
        for lv in Complexity:
            n_r, r = getattr(self, lv.value)
            if int(n_r) != n_r or int(r) != r or n_r < 1 or r < 1:
                raise ConfigurationError(f"level {lv.value} budget must be positive integers, got {(n_r, r)}")

    def __getitem__(self, level: Complexity | str) -> tuple[int, int]:
        return getattr(self, Complexity(level).value)

    def check_steps(self, n_steps: int) -> None:
        for lv in Complexity:
            if self[lv][0] > n_steps:
                raise ConfigurationError(f"level {lv.value} asks for {self[lv][0]} reasoning steps but N={n_steps}")


PAPER_LEVELS = ComplexityLevels()


@dataclass(frozen=True)
class ReasoningConfig:
    n_r_star: int
    r_star: int
    n_steps: int
    schedule: TimeSchedule

    def __post_init__(self):
        if not 0 <= self.n_r_star <= self.n_steps:
            raise ConfigurationError(f"reasoning steps {self.n_r_star} outside [0, {self.n_steps}]")
        if self.r_star < 1:
            raise ConfigurationError(f"reasoning frames must be >= 1, got {self.r_star}")
        if self.schedule.n_steps != self.n_steps:
            raise ConfigurationError("schedule length does not match total step count")


def make_reasoning_config(n_r_star: int, r_star: int, n_steps: int, t_max: float = 1.0, t_min: float = 0.0) -> ReasoningConfig:
    return ReasoningConfig(n_r_star, r_star, n_steps, make_schedule(n_steps, t_max, t_min))


def _round_half_away(x: Fraction) -> int:
    if x >= 0:
        return math.floor(x + Fraction(1, 2))
    return -math.floor(-x + Fraction(1, 2))


def allocate(dist: ComplexityDistribution, levels: ComplexityLevels = PAPER_LEVELS) -> tuple[int, int]:
    """Probability-weighted reasoning budget, each component rounded half away from zero.

    The weighted sums are formed in exact rational arithmetic from the float
    probabilities so that rounding at ``.5`` boundaries is not at the mercy of
    summation order.
    """
    n_r = sum(Fraction(dist[lv]) * levels[lv][0] for lv in Complexity)
    r = sum(Fraction(dist[lv]) * levels[lv][1] for lv in Complexity)
    return _round_half_away(n_r), _round_half_away(r)


# --------------------------------------------------------------------------
# Keyword lexicon
# --------------------------------------------------------------------------

_WORD = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


def _tokens(text: str) -> list[str]:
    return _WORD.findall(text.casefold())


@dataclass(frozen=True)
class Lexicon:
    high: frozenset[str]
    medium: frozenset[str]
    low: frozenset[str]
    source: str = field(default="<memory>", compare=False)

    def __post_init__(self):
        for lv in Complexity:
            words = frozenset(filter(None, (" ".join(_tokens(w)) for w in getattr(self, lv.value))))
            if not words:
                raise ConfigurationError(f"lexicon class {lv.value!r} is empty")
            object.__setattr__(self, lv.value, words)
        for a, b in ((Complexity.HIGH, Complexity.MEDIUM), (Complexity.HIGH, Complexity.LOW), (Complexity.MEDIUM, Complexity.LOW)):
            both = self[a] & self[b]
            if both:
                raise ConfigurationError(f"keywords in both {a.value} and {b.value}: {sorted(both)}")

    def __getitem__(self, level: Complexity | str) -> frozenset[str]:
        return getattr(self, Complexity(level).value)

    def matches(self, instruction: str) -> dict[Complexity, list[str]]:
        """Keywords of each class that occur in ``instruction`` as whole words."""
        padded = " " + " ".join(_tokens(instruction)) + " "
        return {lv: sorted(k for k in self[lv] if f" {k} " in padded) for lv in Complexity}


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a ``class<TAB>keyword`` file; ``#`` starts a comment."""
    path = Path(path)
    return _parse_lexicon(path.read_text(encoding="utf-8"), str(path))


def _parse_lexicon(text: str, source: str) -> Lexicon:
    sets: dict[str, set[str]] = {lv.value: set() for lv in Complexity}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ConfigurationError(f"{source}: expected '<class>\\t<keyword>'", line=lineno)
        cls, word = parts[0].strip().lower(), parts[1].strip()
        if cls not in sets:
            raise ConfigurationError(f"{source}: unknown class {cls!r}", line=lineno)
        sets[cls].add(word)
    return Lexicon(frozenset(sets["high"]), frozenset(sets["medium"]), frozenset(sets["low"]), source=source)


@functools.lru_cache(maxsize=None)
def default_lexicon() -> Lexicon:
    ref = resources.files("adaptive_edit") / "data" / "lexicon.tsv"
    return _parse_lexicon(ref.read_text(encoding="utf-8"), "default")


def classify_instruction(instruction: str, lexicon: Lexicon | None = None) -> ComplexityDistribution:
    """One-hot distribution on the highest-priority matched class.

    Priority is high > medium > low; an instruction with no keyword hit is
    treated as medium.
    """
    if not instruction or not instruction.strip():
        raise InputError("instruction is empty")
    lexicon = lexicon or default_lexicon()
    hits = lexicon.matches(instruction)
    for lv in PRIORITY:
        if hits[lv]:
            return ComplexityDistribution.one_hot(lv)
    return ComplexityDistribution.one_hot(Complexity.MEDIUM)


class ComplexityPredictor(Protocol):
    def predict(self, instruction: str, reference=None) -> ComplexityDistribution: ...


class KeywordPredictor:
    """Default predictor: the deterministic keyword rule. Ignores the reference."""

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon or default_lexicon()

    def predict(self, instruction: str, reference=None) -> ComplexityDistribution:
        return classify_instruction(instruction, self.lexicon)
