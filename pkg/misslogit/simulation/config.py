"""
Study configuration files.

A study file is a JSON object; every key below except ``name`` has a
default, so presets only spell out what differs::

    {
      "name": "study1-a",
      "n": 1000, "M": 15, "reps": 500, "seed": 20240101,
      "beta_true": [-1, 1, 0.7, -1],
      "x1": {"support": [-0.3, -0.1, 0.4, 1], "probs": [0.2, 0.3, 0.3, 0.2]},
      "x2": {"support": [-1, -0.4, 0.2, 0.6], "probs": [0.1, 0.3, 0.3, 0.3]},
      "z":  {"bernoulli": 0.4},
      "surrogate": {"kind": "threshold"},
      "alpha": [2.6, 0.6, 0.6],
      "gamma": [0.7, -0.2, 0.1, -1.2],
      "estimators": ["CC", "SIPW", "MI1", "MI2"],
      "variance": "both",
      "sweep": [{"label": "a1", "alpha": [2.6, 0.6, 0.6]}, ...]
    }
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..config import ESTIMATOR_LABELS, VARIANCE_CHOICES, EstimationConfig
from ..errors import ConfigError
from ..models.record import Level
from ..utils.hashing import canonical_hash


class DiscreteSpec(BaseModel):
    """Finite support with probabilities; ``{"bernoulli": p}`` is shorthand."""

    model_config = ConfigDict(frozen=True)

    support: Tuple[float, ...]
    probs: Tuple[float, ...]

    @model_validator(mode="before")
    @classmethod
    def _expand_bernoulli(cls, raw):
        if isinstance(raw, dict) and "bernoulli" in raw:
            p = float(raw["bernoulli"])
            return {"support": (0, 1), "probs": (1.0 - p, p)}
        return raw

    @model_validator(mode="after")
    def _check(self) -> "DiscreteSpec":
        if len(self.support) == 0 or len(self.support) != len(self.probs):
            raise ValueError("support and probs must be nonempty and of equal length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support values must be distinct")
        if any(p < 0 or p > 1 for p in self.probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, expected 1")
        return self

    @classmethod
    def bernoulli(cls, p: float) -> "DiscreteSpec":
        return cls.model_validate({"bernoulli": p})

    def levels(self) -> List[Level]:
        return [Level.of(v) for v in self.support]

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Support indices of ``n`` i.i.d. draws (inverse CDF)."""
        cumulative = np.cumsum(self.probs)
        cumulative[-1] = 1.0
        return np.searchsorted(cumulative, rng.random(n), side="right").clip(max=len(self.probs) - 1)


class SurrogateSpec(BaseModel):
    """
    How W1, W2 are derived from X1, X2.

    ``threshold``: W_k = 1 if X_k > 0 else 0.
    ``conditional``: W_k drawn from ``w1[x]`` / ``w2[x]`` keyed by the
    canonical token of the X_k value.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["threshold", "conditional"] = "threshold"
    w1: Dict[str, DiscreteSpec] = Field(default_factory=dict)
    w2: Dict[str, DiscreteSpec] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "SurrogateSpec":
        if self.kind == "conditional" and (not self.w1 or not self.w2):
            raise ValueError("conditional surrogates need both w1 and w2 tables")
        return self


class MaskSpec(BaseModel):
    """
    Extra masking of one block: the block stays observed with
    probability H(intercept + y*Y + z'Z + w'W).
    """

    model_config = ConfigDict(frozen=True)

    block: Literal["x1", "x2"]
    intercept: float
    y: float = 0.0
    z: Tuple[float, ...] = (0.0,)
    w: Tuple[float, ...] = (0.0, 0.0)


class SweepEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    alpha: Optional[Tuple[float, float, float]] = None
    n: Optional[int] = Field(default=None, ge=10)
    M: Optional[int] = Field(default=None, ge=2)


class StudyConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "study"
    n: int = Field(default=1000, ge=10)
    M: int = Field(default=15, ge=2)
    reps: int = Field(default=500, ge=2)
    seed: int = Field(default=20240101, ge=0)

    beta_true: Tuple[float, float, float, float] = (-1.0, 1.0, 0.7, -1.0)
    x1: DiscreteSpec = DiscreteSpec(support=(-0.3, -0.1, 0.4, 1.0), probs=(0.2, 0.3, 0.3, 0.2))
    x2: DiscreteSpec = DiscreteSpec(support=(-1.0, -0.4, 0.2, 0.6), probs=(0.1, 0.3, 0.3, 0.3))
    z: DiscreteSpec = DiscreteSpec(support=(0, 1), probs=(0.6, 0.4))
    surrogate: SurrogateSpec = SurrogateSpec()

    alpha: Tuple[float, float, float] = (2.6, 0.6, 0.6)
    gamma: Tuple[float, float, float, float] = (0.7, -0.2, 0.1, -1.2)
    masks: Tuple[MaskSpec, ...] = ()

    estimators: Tuple[str, ...] = ("CC", "SIPW", "MI1", "MI2")
    variance: str = "both"
    sweep: Tuple[SweepEntry, ...] = ()

    @field_validator("estimators")
    @classmethod
    def _known_estimators(cls, estimators: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [e for e in estimators if e not in ESTIMATOR_LABELS]
        if unknown:
            raise ValueError(f"unknown estimators {unknown}")
        return estimators

    @field_validator("variance")
    @classmethod
    def _known_variance(cls, variance: str) -> str:
        if variance not in VARIANCE_CHOICES:
            raise ValueError(f"variance must be one of {VARIANCE_CHOICES}")
        return variance

    @model_validator(mode="after")
    def _check_surrogates(self) -> "StudyConfig":
        if self.surrogate.kind == "conditional":
            for name, spec, table in (("w1", self.x1, self.surrogate.w1), ("w2", self.x2, self.surrogate.w2)):
                missing = [l.token for l in spec.levels() if l.token not in table]
                if missing:
                    raise ValueError(f"surrogate table {name} lacks X levels {missing}")
        return self

    # ------------------------------------------------------------------
    # Derived
    # ------------------------------------------------------------------

    def estimation(self, seed: int) -> EstimationConfig:
        return EstimationConfig(
            imputations=self.M,
            variance=self.variance,
            estimators=self.estimators,
            seed=seed,
        )

    def scenarios(self) -> List[Tuple[str, "StudyConfig"]]:
        """(label, config) per sweep entry; the config itself when no sweep."""
        if not self.sweep:
            return [(self.name, self)]

        out = []
        for entry in self.sweep:
            update = {k: v for k, v in (("alpha", entry.alpha), ("n", entry.n), ("M", entry.M)) if v is not None}
            update["sweep"] = ()
            update["name"] = f"{self.name}-{entry.label}"
            out.append((entry.label, self.model_copy(update=update)))
        return out

    @property
    def config_hash(self) -> str:
        return canonical_hash(self.model_dump(mode="json"))

    # ------------------------------------------------------------------
    # File IO
    # ------------------------------------------------------------------

    @classmethod
    def load(cls, path: str | Path) -> "StudyConfig":
        try:
            with Path(path).open() as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read study config {path}: {e}") from e
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "StudyConfig":
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(p) for p in first["loc"]) or None
            raise ConfigError(f"Invalid study config: {first['msg']}", field=field) from e

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.model_dump(mode="json"), indent=2) + "\n")
