from .pools import (
    DonorIndex,
    DonorPool,
    FallbackEvent,
    PoolLevel,
    Resolution,
    build_donor_index,
    fallback_report,
    resolve_pool,
)
from .sampler import CompletedSets, impute, sample_block

__all__ = [
    "CompletedSets",
    "DonorIndex",
    "DonorPool",
    "FallbackEvent",
    "PoolLevel",
    "Resolution",
    "build_donor_index",
    "fallback_report",
    "impute",
    "resolve_pool",
    "sample_block",
]
