"""Planner configuration: footprint, thresholds, limits and solver settings.

A config file is YAML or JSON with any subset of the keys below; missing
keys take the defaults::

    footprint: {width: 10.0}          # or {altitude: 50, half_angle: 0.3}
    alpha: 0.99
    rho: 0.15
    limits: {v_max: 5.0, a_max: 2.5, j_max: null}   # null -> unbounded jerk
    exact_limit: 15
    seed: 0
    ga: {population: 450, generations: 350, elite_fraction: 0.05,
         tournament_size: 4, p_mut_order: 0.30, p_mut_choice: 0.40}
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import InvalidSpecError
from .kinodynamics import MotionLimits
from .roi import CoverageParams, FootprintSpec, footprint_width
from .router import DEFAULT_EXACT_LIMIT, DEFAULT_RHO, CostParams, GAConfig


@dataclass(frozen=True)
class GASettings:
    population: int = 450
    generations: int = 350
    elite_fraction: float = 0.05
    tournament_size: int = 4
    p_mut_order: float = 0.30
    p_mut_choice: float = 0.40
    lambda_turns: Optional[float] = None  # None -> use rho


@dataclass(frozen=True)
class PlannerConfig:
    footprint: FootprintSpec = field(default_factory=lambda: FootprintSpec(width=10.0))
    alpha: float = 0.99
    rho: float = DEFAULT_RHO
    limits: MotionLimits = field(default_factory=MotionLimits)
    exact_limit: int = DEFAULT_EXACT_LIMIT
    seed: int = 0
    ga: GASettings = field(default_factory=GASettings)

    def __post_init__(self):
        self.coverage_params  # validates alpha and footprint
        CostParams(self.rho)
        self.ga_config()  # validates GA settings early
        if self.exact_limit < 1:
            raise InvalidSpecError("exact_limit must be >= 1")

    @property
    def width(self) -> float:
        return footprint_width(self.footprint)

    @property
    def coverage_params(self) -> CoverageParams:
        return CoverageParams(self.alpha, self.width)

    @property
    def cost_params(self) -> CostParams:
        return CostParams(self.rho)

    def ga_config(self, seed: Optional[int] = None) -> GAConfig:
        g = self.ga
        lam = self.rho if g.lambda_turns is None else g.lambda_turns
        return GAConfig(seed=self.seed if seed is None else seed, lambda_turns=lam,
                        population=g.population, generations=g.generations,
                        elite_fraction=g.elite_fraction, tournament_size=g.tournament_size,
                        p_mut_order=g.p_mut_order, p_mut_choice=g.p_mut_choice)

    def to_dict(self) -> dict:
        fp = {k: v for k, v in asdict(self.footprint).items() if v is not None}
        lim = asdict(self.limits)
        if math.isinf(lim["j_max"]):
            lim["j_max"] = None
        return {"footprint": fp, "alpha": self.alpha, "rho": self.rho, "limits": lim,
                "exact_limit": self.exact_limit, "seed": self.seed, "ga": asdict(self.ga)}

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "PlannerConfig":
        d = dict(d or {})
        unknown = set(d) - {"footprint", "alpha", "rho", "limits", "exact_limit", "seed", "ga"}
        if unknown:
            raise InvalidSpecError(f"unknown config keys: {sorted(unknown)}")
        kw: dict[str, Any] = {}
        try:
            if "footprint" in d:
                kw["footprint"] = FootprintSpec(**d["footprint"])
            if "limits" in d:
                lim = dict(d["limits"])
                if lim.get("j_max") is None:
                    lim["j_max"] = math.inf
                kw["limits"] = MotionLimits(**{k: float(v) for k, v in lim.items()})
            if "ga" in d:
                kw["ga"] = GASettings(**d["ga"])
            for key in ("alpha", "rho"):
                if key in d:
                    kw[key] = float(d[key])
            for key in ("exact_limit", "seed"):
                if key in d:
                    kw[key] = int(d[key])
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidSpecError):
                raise
            raise InvalidSpecError(str(exc)) from None

    def override(self, **changes) -> "PlannerConfig":
        """Copy with non-None top-level fields replaced (CLI flags over the file)."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if "width" in changes:
            changes["footprint"] = FootprintSpec(width=changes.pop("width"))
        return replace(self, **changes)


def load_config(path: Optional[str | Path]) -> PlannerConfig:
    if path is None:
        return PlannerConfig()
    with open(path) as fh:
        return PlannerConfig.from_dict(yaml.safe_load(fh))
