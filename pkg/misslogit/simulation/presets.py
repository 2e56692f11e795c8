"""
Bundled study settings.

Studies 1 and 4 vary the selection probabilities through alpha, Study 2
the sample size and Study 3 the number of imputations. The same
settings ship as JSON files under ``configs/``.
"""

from __future__ import annotations

from typing import Dict

from ..errors import ConfigError
from .config import DiscreteSpec, MaskSpec, StudyConfig, SurrogateSpec, SweepEntry

GAMMA = (0.7, -0.2, 0.1, -1.2)

STUDY1_ALPHAS = {
    "a": (2.6, 0.6, 0.6),   # ~ (0.72, 0.10, 0.10, 0.08)
    "b": (1.6, 0.6, 0.6),   # ~ (0.48, 0.18, 0.18, 0.16)
    "c": (0.8, 0.6, 0.6),   # ~ (0.30, 0.24, 0.24, 0.22)
}

STUDY2_SIZES = {"n500": 500, "n1000": 1000, "n1500": 1500}

STUDY3_IMPUTATIONS = {"M10": 10, "M20": 20, "M30": 30}

STUDY4_ALPHAS = {
    "a": (2.4, 0.6, 0.6),
    "b": (1.6, 0.6, 0.6),
    "c": (1.0, 0.6, 0.6),
}


def _study1(**update) -> StudyConfig:
    return StudyConfig(
        name="study1",
        n=1000,
        M=15,
        beta_true=(-1.0, 1.0, 0.7, -1.0),
        x1=DiscreteSpec(support=(-0.3, -0.1, 0.4, 1.0), probs=(0.2, 0.3, 0.3, 0.2)),
        x2=DiscreteSpec(support=(-1.0, -0.4, 0.2, 0.6), probs=(0.1, 0.3, 0.3, 0.3)),
        z=DiscreteSpec.bernoulli(0.4),
        surrogate=SurrogateSpec(kind="threshold"),
        alpha=STUDY1_ALPHAS["a"],
        gamma=GAMMA,
        **update,
    )


def _study2(**update) -> StudyConfig:
    settings = dict(
        name="study2",
        n=1000,
        M=15,
        beta_true=(1.2, 1.0, 1.0, 1.0),
        x1=DiscreteSpec(support=(-0.3, -0.08, 0.5, 0.8), probs=(0.1, 0.3, 0.3, 0.3)),
        x2=DiscreteSpec(support=(-0.8, -0.6, 0.1, 0.9), probs=(0.3, 0.3, 0.3, 0.1)),
        z=DiscreteSpec.bernoulli(0.5),
        surrogate=SurrogateSpec(kind="threshold"),
        alpha=(1.4, 0.6, 0.6),
        gamma=GAMMA,
    )
    settings.update(update)
    return StudyConfig(**settings)


def _study4(**update) -> StudyConfig:
    return StudyConfig(
        name="study4",
        n=1500,
        M=15,
        beta_true=(1.2, 1.0, 1.0, 1.0),
        x1=DiscreteSpec.bernoulli(0.5),
        x2=DiscreteSpec.bernoulli(0.5),
        z=DiscreteSpec.bernoulli(0.5),
        surrogate=SurrogateSpec(
            kind="conditional",
            w1={"1": DiscreteSpec.bernoulli(0.6), "0": DiscreteSpec.bernoulli(0.5)},
            w2={"1": DiscreteSpec.bernoulli(0.55), "0": DiscreteSpec.bernoulli(0.6)},
        ),
        alpha=STUDY4_ALPHAS["a"],
        gamma=GAMMA,
        **update,
    )


def study_config(study: int, variant: str | None = None) -> StudyConfig:
    """
    Preset for ``study`` (1-4). Without ``variant`` the config carries the
    study's full sweep; with one it is that single scenario.
    """
    if study == 1:
        sweep = [SweepEntry(label=k, alpha=a) for k, a in STUDY1_ALPHAS.items()]
        base = _study1(sweep=tuple(sweep))
    elif study == 2:
        sweep = [SweepEntry(label=k, n=n) for k, n in STUDY2_SIZES.items()]
        base = _study2(sweep=tuple(sweep))
    elif study == 3:
        sweep = [SweepEntry(label=k, M=m) for k, m in STUDY3_IMPUTATIONS.items()]
        base = _study2(name="study3", sweep=tuple(sweep))
    elif study == 4:
        sweep = [SweepEntry(label=k, alpha=a) for k, a in STUDY4_ALPHAS.items()]
        base = _study4(sweep=tuple(sweep))
    else:
        raise ConfigError(f"Unknown study {study}; expected 1-4", field="study")

    if variant is None:
        return base

    scenarios: Dict[str, StudyConfig] = dict(base.scenarios())
    if variant not in scenarios:
        raise ConfigError(f"Unknown variant '{variant}' for study {study}; choose from {sorted(scenarios)}", field="variant")
    return scenarios[variant]


def survey_like_config(n: int = 1635, seed: int = 20221117) -> StudyConfig:
    """
    Shaped like a visitor survey: binary X1 and X2, a six-level spending
    covariate Z and a three-level travel-time surrogate for X1. X1 is
    masked first, then X2 through a second logistic mask, so all four
    patterns occur.
    """
    travel_given_x1 = {
        "1": DiscreteSpec(support=(1, 2, 3), probs=(0.30, 0.45, 0.25)),
        "0": DiscreteSpec(support=(1, 2, 3), probs=(0.45, 0.40, 0.15)),
    }
    return StudyConfig(
        name="survey-like",
        n=n,
        M=15,
        reps=2,
        seed=seed,
        beta_true=(-2.0, 0.8, 0.9, 0.4),
        x1=DiscreteSpec.bernoulli(0.55),
        x2=DiscreteSpec.bernoulli(0.5),
        z=DiscreteSpec(
            support=(0.1, 0.35, 0.75, 1.25, 1.75, 3.0),
            probs=(0.15, 0.30, 0.25, 0.15, 0.08, 0.07),
        ),
        surrogate=SurrogateSpec(
            kind="conditional",
            w1=travel_given_x1,
            w2={"1": DiscreteSpec.bernoulli(0.5), "0": DiscreteSpec.bernoulli(0.5)},
        ),
        # Pattern 1 almost surely; the masks below create the missingness
        alpha=(40.0, 0.0, 0.0),
        gamma=(0.0, 0.0, 0.0, 0.0),
        masks=(
            MaskSpec(block="x1", intercept=0.9, y=0.1, z=(-0.4,), w=(0.15, 0.0)),
            MaskSpec(block="x2", intercept=-1.0, y=1.2, z=(0.3,), w=(-0.4, 0.0)),
        ),
    )
