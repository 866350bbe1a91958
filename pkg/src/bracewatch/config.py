"""Run configuration: defaults, TOML loading and command-line overrides.

Precedence, lowest first: built-in defaults, the TOML file, CLI flags.

Example file::

    seed = 42
    category = "scaffold_unit"

    [canny]
    low = 50
    high = 150

    [hough]
    threshold_frac = 0.3
    max_lines = 16

    [brace]
    central_frac = 0.6

    [synth]
    unit_height_mm = 1900
    clutter_lines = [0, 5]
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .brace import DEFAULT_SEED, BraceParams
from .coco import DEFAULT_CATEGORY
from .errors import ConfigError, InvalidThresholds
from .hough import HoughParams
from .imaging import DEFAULT_CANNY_HIGH, DEFAULT_CANNY_LOW
from .synth import ClutterRanges, ScaffoldSpec


@dataclass(frozen=True)
class CannyParams:
    low: float = DEFAULT_CANNY_LOW
    high: float = DEFAULT_CANNY_HIGH

    def __post_init__(self):
        if not 0 <= self.low <= self.high:
            raise InvalidThresholds(f"need 0 <= low <= high, got {self.low}, {self.high}")


@dataclass(frozen=True)
class RunConfig:
    canny: CannyParams = field(default_factory=CannyParams)
    hough: HoughParams = field(default_factory=HoughParams)
    brace: BraceParams = field(default_factory=BraceParams)
    synth: ScaffoldSpec = field(default_factory=ScaffoldSpec)
    clutter: ClutterRanges = field(default_factory=ClutterRanges)
    category: str = DEFAULT_CATEGORY
    seed: int = DEFAULT_SEED

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        sections = {}
        for name, klass in (("canny", CannyParams), ("hough", HoughParams), ("brace", BraceParams)):
            sections[name] = _build(klass, doc.pop(name, {}), name)
        synth_doc = dict(doc.pop("synth", {}))
        clutter_keys = {f.name for f in dataclasses.fields(ClutterRanges)}
        clutter_doc = {k: tuple(synth_doc.pop(k)) for k in list(synth_doc) if k in clutter_keys}
        sections["synth"] = _build(ScaffoldSpec, synth_doc, "synth")
        sections["clutter"] = _build(ClutterRanges, clutter_doc, "synth")
        category = doc.pop("category", DEFAULT_CATEGORY)
        seed = doc.pop("seed", DEFAULT_SEED)
        if doc:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(doc))}")
        if not isinstance(category, str) or not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("category must be a string and seed an integer")
        return cls(category=category, seed=seed, **sections)

    @classmethod
    def from_toml(cls, path) -> "RunConfig":
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(doc)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {"seed": self.seed, "category": self.category}
        for name in ("canny", "hough", "brace"):
            out[name] = dataclasses.asdict(getattr(self, name))
        out["synth"] = {**dataclasses.asdict(self.synth),
                        **{k: list(v) for k, v in dataclasses.asdict(self.clutter).items()}}
        return out


def _build(klass, values, section):
    if not isinstance(values, dict):
        raise ConfigError(f"[{section}] must be a table")
    known = {f.name: f for f in dataclasses.fields(klass)}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {', '.join(unknown)}")
    values = dict(values)
    for key, val in values.items():
        if isinstance(val, float) and math.isnan(val):
            raise ConfigError(f"{section}.{key} is NaN")
    try:
        return klass(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc
