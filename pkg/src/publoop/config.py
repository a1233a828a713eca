"""Scenario configuration: defaults, YAML loading, dotted overrides.

Precedence is defaults -> scenario file -> explicit overrides, in that
order. Unknown keys are hard errors that list the valid keys, so a typo in
a sweep never silently runs the default. The fully resolved configuration
is what gets hashed into the audit chain's first event.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError

# Stress-window knobs the engine knows how to apply mid-run.
WINDOW_PATHS = (
    "arrival_multiplier",
    "noise_multiplier",
    "quality_mu_delta",
    "adversary_active",
)


@dataclass
class WorldConfig:
    n_authors: int = 1000
    n_human_reviewers: int = 200
    n_ai_reviewers: int = 30
    keyword_universe_size: int = 50
    keywords_per_researcher: int = 4
    p_sub: float = 0.03
    quality_mu: float = 0.6
    quality_sigma: float = 0.15
    complexity_mu: float = 0.5
    complexity_sigma: float = 0.2
    max_load: int = 6
    reliability_low: float = 0.8
    reliability_high: float = 1.2


@dataclass
class PipelineConfig:
    k_reviewers: int = 3
    sim_threshold: float = 0.1
    max_reviews_per_timestep: int = 180
    accept_th: float = 0.7
    reject_th: float = 0.4
    disc_th: float = 1.4
    comp_th: float = 0.55
    max_rounds: int = 2
    noise_base: float = 0.02
    noise_complexity_gain: float = 0.02
    ai_noise_multiplier: float = 1.5
    time_mu: float = -0.125
    time_sigma: float = 0.5
    ai_time_factor: float = 0.5
    triage_noise: float = 0.15
    max_revisions: int = 0
    revise_quality_bump: float = 0.05


@dataclass
class GovernanceConfig:
    triage_th0: float = 0.45
    tau_max: float = 0.7
    triage_step: float = 0.03
    ai_initial: float = 0.2
    ai_min: float = 0.1
    ai_max: float = 0.6
    ai_step: float = 0.05
    backlog_high: int = 40
    backlog_low: int = 10
    disagreement_high: float = 0.30
    hysteresis_steps: int = 3
    escalation_initial: bool = True
    w_backlog: float = 1.0
    w_disagreement: float = 1.0
    w_load: float = 1.0
    w_concentration: float = 1.0
    w_perf: float = 1.0
    eta: float = 1.0


@dataclass
class AdversaryConfig:
    enabled: bool = False
    cluster_reviewers: int = 12
    cluster_authors: int = 60
    cluster_keyword_pool: int = 6
    alpha: float = 0.2
    detect_threshold: float = 0.2
    patience: int = 3
    mitigation_strength: float = 0.15
    share_growth: float = 0.05
    share_cap: float = 0.30
    share_noise: float = 0.2
    measure_window: int = 5
    disable_mitigation: bool = False


@dataclass
class PostpubConfig:
    enabled: bool = True
    xi: float = 4.0
    q0: float = 0.6
    horizon: int = 20
    smoothing_window: int = 10
    alpha_a: float = 0.1
    alpha_r: float = 0.05
    c_bar: float = 2.0


@dataclass
class Window:
    start: int
    end: int
    path: str
    value: Any


_SECTIONS = {
    "world": WorldConfig,
    "pipeline": PipelineConfig,
    "governance": GovernanceConfig,
    "adversary": AdversaryConfig,
    "postpub": PostpubConfig,
}
_TOP_KEYS = ("name", "seed", "horizon")


@dataclass
class ScenarioConfig:
    name: str = "baseline"
    seed: int = 42
    horizon: int = 200
    world: WorldConfig = field(default_factory=WorldConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    governance: GovernanceConfig = field(default_factory=GovernanceConfig)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    postpub: PostpubConfig = field(default_factory=PostpubConfig)
    windows: list[Window] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def resolved_dict(self) -> dict:
        out: dict[str, Any] = {
            "name": self.name,
            "seed": self.seed,
            "horizon": self.horizon,
        }
        for section, cls in _SECTIONS.items():
            obj = getattr(self, section)
            out[section] = {f.name: getattr(obj, f.name) for f in fields(cls)}
        out["windows"] = [
            {"start": w.start, "end": w.end, "path": w.path, "value": w.value}
            for w in self.windows
        ]
        out["provenance"] = self.provenance
        return out

    def config_hash(self) -> str:
        resolved = self.resolved_dict()
        resolved.pop("provenance")  # hash identifies the dynamics, not the route
        blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def copy(self) -> "ScenarioConfig":
        return copy.deepcopy(self)


def valid_keys() -> list[str]:
    keys = list(_TOP_KEYS)
    for section, cls in _SECTIONS.items():
        keys.extend(f"{section}.{f.name}" for f in fields(cls))
    return keys


def _coerce(key: str, value: Any, target_type: type) -> Any:
    if target_type is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key} expects a boolean, got {value!r}")
    if target_type is int:
        if isinstance(value, bool):
            raise ConfigError(f"{key} expects an integer, got {value!r}")
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"{key} expects an integer, got {value!r}")
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} expects a number, got {value!r}")
        return float(value)
    if target_type is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} expects a string, got {value!r}")
        return value
    return value


def _apply_dotted(cfg: ScenarioConfig, key: str, value: Any) -> None:
    if key == "name":
        cfg.name = _coerce(key, value, str)
        return
    if key == "seed":
        cfg.seed = _coerce(key, value, int)
        return
    if key == "horizon":
        cfg.horizon = _coerce(key, value, int)
        return
    if "." not in key:
        raise ConfigError(f"unknown config key {key!r}; valid keys: {', '.join(valid_keys())}")
    section, _, name = key.partition(".")
    cls = _SECTIONS.get(section)
    if cls is None:
        raise ConfigError(f"unknown config key {key!r}; valid keys: {', '.join(valid_keys())}")
    typemap = {f.name: f.type for f in fields(cls)}
    if name not in typemap:
        raise ConfigError(f"unknown config key {key!r}; valid keys: {', '.join(valid_keys())}")
    target = getattr(cfg, section)
    current = getattr(target, name)
    setattr(target, name, _coerce(key, value, type(current)))


def _parse_windows(raw: Any, horizon: int) -> list[Window]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError("windows must be a list of {start, end, path, value} entries")
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or set(entry) != {"start", "end", "path", "value"}:
            raise ConfigError(
                f"windows[{i}] must have exactly the keys start, end, path, value"
            )
        w = Window(
            start=_coerce(f"windows[{i}].start", entry["start"], int),
            end=_coerce(f"windows[{i}].end", entry["end"], int),
            path=_coerce(f"windows[{i}].path", entry["path"], str),
            value=entry["value"],
        )
        validate_window(w, horizon)
        out.append(w)
    return out


def validate_window(w: Window, horizon: int) -> None:
    if w.path not in WINDOW_PATHS:
        raise ConfigError(
            f"unknown window path {w.path!r}; valid paths: {', '.join(WINDOW_PATHS)}"
        )
    if not (0 <= w.start < w.end <= horizon):
        raise ConfigError(
            f"window [{w.start}, {w.end}) must satisfy 0 <= start < end <= horizon ({horizon})"
        )
    if w.path == "adversary_active":
        if not isinstance(w.value, bool):
            raise ConfigError("adversary_active window value must be a boolean")
    else:
        if isinstance(w.value, bool) or not isinstance(w.value, (int, float)):
            raise ConfigError(f"window path {w.path!r} expects a numeric value")


def _validate(cfg: ScenarioConfig) -> None:
    w, p, g, a, pp = cfg.world, cfg.pipeline, cfg.governance, cfg.adversary, cfg.postpub
    checks = [
        (cfg.horizon >= 0, "horizon must be >= 0"),
        (w.n_authors >= 1, "world.n_authors must be >= 1"),
        (w.n_human_reviewers >= 0, "world.n_human_reviewers must be >= 0"),
        (
            # human reviewers are drawn from the researcher pool, so ids
            # stay unique and self-review checks stay meaningful
            w.n_human_reviewers <= w.n_authors,
            "world.n_human_reviewers must be <= world.n_authors",
        ),
        (w.n_ai_reviewers >= 0, "world.n_ai_reviewers must be >= 0"),
        (w.keyword_universe_size >= 1, "world.keyword_universe_size must be >= 1"),
        (
            1 <= w.keywords_per_researcher <= w.keyword_universe_size,
            "world.keywords_per_researcher must be in [1, keyword_universe_size]",
        ),
        (0.0 <= w.p_sub <= 1.0, "world.p_sub must be in [0, 1]"),
        (w.quality_sigma >= 0 and w.complexity_sigma >= 0, "world sigmas must be >= 0"),
        (w.max_load >= 1, "world.max_load must be >= 1"),
        (0 < w.reliability_low <= w.reliability_high, "world reliability bounds invalid"),
        (p.k_reviewers >= 1, "pipeline.k_reviewers must be >= 1"),
        (p.max_reviews_per_timestep >= 0, "pipeline.max_reviews_per_timestep must be >= 0"),
        (p.reject_th < p.accept_th, "pipeline.reject_th must be < accept_th"),
        (p.max_rounds >= 1, "pipeline.max_rounds must be >= 1"),
        (p.noise_base >= 0 and p.noise_complexity_gain >= 0, "pipeline noise terms must be >= 0"),
        (p.ai_noise_multiplier > 0, "pipeline.ai_noise_multiplier must be > 0"),
        (p.time_sigma > 0, "pipeline.time_sigma must be > 0"),
        (p.ai_time_factor > 0, "pipeline.ai_time_factor must be > 0"),
        (p.triage_noise >= 0, "pipeline.triage_noise must be >= 0"),
        (p.max_revisions >= 0, "pipeline.max_revisions must be >= 0"),
        (g.backlog_low < g.backlog_high, "governance.backlog_low must be < backlog_high"),
        (g.ai_min <= g.ai_max, "governance.ai_min must be <= ai_max"),
        (g.ai_step > 0 and g.triage_step > 0, "governance steps must be > 0"),
        (
            g.ai_min <= g.ai_initial <= g.ai_max,
            "governance.ai_initial must be in [ai_min, ai_max]",
        ),
        (
            0 <= g.triage_th0 <= g.tau_max,
            "governance.triage_th0 must be in [0, tau_max]",
        ),
        (g.hysteresis_steps >= 1, "governance.hysteresis_steps must be >= 1"),
        (0.0 <= a.alpha <= 1.0, "adversary.alpha must be in [0, 1]"),
        (0.0 <= a.share_cap <= 1.0, "adversary.share_cap must be in [0, 1]"),
        (0.0 <= a.mitigation_strength <= 1.0, "adversary.mitigation_strength must be in [0, 1]"),
        (a.patience >= 1, "adversary.patience must be >= 1"),
        (a.measure_window >= 1, "adversary.measure_window must be >= 1"),
        (pp.xi > 0, "postpub.xi must be > 0"),
        (pp.horizon >= 1, "postpub.horizon must be >= 1"),
        (pp.smoothing_window >= 1, "postpub.smoothing_window must be >= 1"),
    ]
    if a.enabled:
        checks.append(
            (
                a.cluster_reviewers <= w.n_human_reviewers,
                "adversary.cluster_reviewers must be <= world.n_human_reviewers",
            )
        )
        checks.append(
            (
                a.cluster_keyword_pool >= 1
                and a.cluster_keyword_pool <= w.keyword_universe_size,
                "adversary.cluster_keyword_pool must be in [1, keyword_universe_size]",
            )
        )
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)
    for win in cfg.windows:
        validate_window(win, cfg.horizon)


def load_scenario(
    path: Optional[str | Path] = None,
    overrides: Optional[list[tuple[str, Any]]] = None,
) -> ScenarioConfig:
    """Build the resolved config: defaults, then file, then overrides."""
    cfg = ScenarioConfig()
    file_name = None
    raw_windows = None
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"scenario file not found: {path}")
        try:
            raw = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"scenario file {path} failed to parse: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"scenario file {path} must contain a mapping")
        file_name = path.name
        raw_windows = raw.pop("windows", None)
        for key, value in raw.items():
            if key in _TOP_KEYS:
                _apply_dotted(cfg, key, value)
            elif key in _SECTIONS:
                if not isinstance(value, dict):
                    raise ConfigError(f"section {key!r} must be a mapping")
                for sub, subval in value.items():
                    _apply_dotted(cfg, f"{key}.{sub}", subval)
            else:
                raise ConfigError(
                    f"unknown config key {key!r}; valid keys: {', '.join(valid_keys())}"
                )
    applied = {}
    for key, value in overrides or []:
        if isinstance(value, str):
            value = yaml.safe_load(value)
        _apply_dotted(cfg, key, value)
        applied[key] = value
    if raw_windows is not None:
        cfg.windows = _parse_windows(raw_windows, cfg.horizon)
    _validate(cfg)
    cfg.provenance = {"scenario_file": file_name, "overrides": applied}
    return cfg
