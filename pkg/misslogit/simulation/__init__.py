from .config import DiscreteSpec, MaskSpec, StudyConfig, SurrogateSpec, SweepEntry
from .generators import gen_dataset, gen_missingness, generate, mask_block, missingness_probs
from .metrics import MetricsTable, Z_975, re_table, relative_efficiency
from .presets import study_config, survey_like_config
from .runner import run_one, run_replications, run_study

__all__ = [
    "DiscreteSpec",
    "MaskSpec",
    "MetricsTable",
    "StudyConfig",
    "SurrogateSpec",
    "SweepEntry",
    "Z_975",
    "gen_dataset",
    "gen_missingness",
    "generate",
    "mask_block",
    "missingness_probs",
    "re_table",
    "relative_efficiency",
    "run_one",
    "run_replications",
    "run_study",
    "study_config",
    "survey_like_config",
]
