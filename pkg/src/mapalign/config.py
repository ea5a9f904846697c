"""Pipeline configuration: defaults, config files, CLI overrides.

Config files are flat ``section.key = value`` text; ``#`` starts a
comment. Every key can also be set on the command line by a flag of the
same dotted name (``--prune.thr_e 0.08``). Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InputError


@dataclass
class RadiographyConfig:
    angle_bins: int = 180
    offset_bin_size: float = 1.0
    peak_threshold_ratio: float = 0.3
    nms_radius: int = 3
    merge_distance: float = 18.0


@dataclass
class PruneConfig:
    thr_e: float = 0.075
    band_radius: int = 3


@dataclass
class MatchingConfig:
    mode: str = "ombb"  # or "exact"
    refine: bool = True
    tol_angle_deg: float = 10.0
    tol_ratio: float = 0.1
    thr_s: float = 1.2
    eps_corner_deg: float = 5.0

    @property
    def tol_angle(self) -> float:
        return math.radians(self.tol_angle_deg)

    @property
    def eps_corner(self) -> float:
        return math.radians(self.eps_corner_deg)


@dataclass
class PipelineConfig:
    occupied_threshold: int = 100
    despeckle_min_px: int = 5
    radiography: RadiographyConfig = field(default_factory=RadiographyConfig)
    prune: PruneConfig = field(default_factory=PruneConfig)
    matching: MatchingConfig = field(default_factory=MatchingConfig)


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_mode(text: str) -> str:
    mode = text.lower()
    if mode not in ("ombb", "exact"):
        raise ValueError(f"mode must be 'ombb' or 'exact', not {text!r}")
    return mode


# dotted key -> (parser, validator description); the single source of
# truth for config files and CLI override flags
SCHEMA: dict[str, tuple] = {
    "occupied_threshold": (int, "gray level in [0, 255]"),
    "despeckle_min_px": (int, "drop occupied components smaller than this (0 = off)"),
    "radiography.angle_bins": (int, "number of projection angles (>= 2)"),
    "radiography.offset_bin_size": (float, "offset bin width in pixels"),
    "radiography.peak_threshold_ratio": (float, "peak cutoff as fraction of global max"),
    "radiography.nms_radius": (int, "suppression window radius in bins"),
    "radiography.merge_distance": (float, "px; merge detected lines closer than this in-frame"),
    "prune.thr_e": (float, "wall/gateway detection threshold in (0, 1)"),
    "prune.band_radius": (int, "edge neighborhood radius in pixels"),
    "matching.mode": (_parse_mode, "'ombb' or 'exact'"),
    "matching.refine": (_parse_bool, "re-fit the winner over all associated faces"),
    "matching.tol_angle_deg": (float, "corner angle tolerance in degrees"),
    "matching.tol_ratio": (float, "edge length ratio tolerance"),
    "matching.thr_s": (float, "acceptable axis-scale ratio (> 1)"),
    "matching.eps_corner_deg": (float, "collinear-corner tolerance in degrees"),
}


def set_key(config: PipelineConfig, key: str, raw) -> None:
    """Set one dotted config key from a raw (string or typed) value."""
    if key not in SCHEMA:
        raise InputError(f"unknown config key: {key}")
    parser, _ = SCHEMA[key]
    try:
        value = parser(raw) if isinstance(raw, str) else parser(str(raw))
    except ValueError as exc:
        raise InputError(f"bad value for {key}: {exc}") from exc

    target = config
    parts = key.split(".")
    for part in parts[:-1]:
        target = getattr(target, part)
    setattr(target, parts[-1], value)
    _validate(config, key)


def _validate(config: PipelineConfig, key: str) -> None:
    checks = {
        "occupied_threshold": lambda: 0 <= config.occupied_threshold <= 255,
        "despeckle_min_px": lambda: config.despeckle_min_px >= 0,
        "radiography.angle_bins": lambda: config.radiography.angle_bins >= 2,
        "radiography.offset_bin_size": lambda: config.radiography.offset_bin_size > 0,
        "radiography.peak_threshold_ratio": lambda: 0 < config.radiography.peak_threshold_ratio <= 1,
        "radiography.nms_radius": lambda: config.radiography.nms_radius >= 0,
        "radiography.merge_distance": lambda: config.radiography.merge_distance >= 0,
        "prune.thr_e": lambda: 0 < config.prune.thr_e < 1,
        "prune.band_radius": lambda: config.prune.band_radius >= 0,
        "matching.tol_angle_deg": lambda: config.matching.tol_angle_deg >= 0,
        "matching.tol_ratio": lambda: config.matching.tol_ratio >= 0,
        "matching.thr_s": lambda: config.matching.thr_s > 1,
        "matching.eps_corner_deg": lambda: config.matching.eps_corner_deg >= 0,
    }
    check = checks.get(key)
    if check and not check():
        raise InputError(f"{key}: value out of range ({SCHEMA[key][1]})")


def load_config_file(path, config: PipelineConfig | None = None) -> PipelineConfig:
    config = config or PipelineConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = text.partition("=")
        set_key(config, key.strip(), raw.strip())
    return config
