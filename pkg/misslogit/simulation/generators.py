"""
Synthetic missing-data samples for the simulation studies.

Draw order within one generator call is fixed (X1, X2, Z, Y, W,
pattern, extra masks) so a seed reproduces the sample exactly.
"""

from __future__ import annotations

import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..core.logit import inv_logit
from ..data.dataset import ColumnLayout, Dataset
from ..models.record import Level
from .config import DiscreteSpec, MaskSpec, StudyConfig

logger = logging.getLogger(__name__)

LAYOUT = ColumnLayout(x1=("x1",), x2=("x2",), z=("z",), w=("w1", "w2"))


def missingness_probs(
    y: np.ndarray,
    w1: np.ndarray,
    w2: np.ndarray,
    z: np.ndarray,
    alpha: Sequence[float],
    gamma: Sequence[float],
) -> np.ndarray:
    """
    (n, 4) pattern probabilities of the multinomial logit with baseline
    pattern 4: log(P_j / P_4) = alpha_j + g1 y + g2 w1 + g3 w2 + g4 z.
    """
    g1, g2, g3, g4 = gamma
    shared = g1 * np.asarray(y, float) + g2 * np.asarray(w1, float) + g3 * np.asarray(w2, float) + g4 * np.asarray(z, float)
    logits = np.column_stack([a + shared for a in alpha] + [np.zeros_like(shared)])
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    return weights / weights.sum(axis=1, keepdims=True)


def gen_missingness(y, w1, w2, z, alpha, gamma, rng: np.random.Generator) -> np.ndarray:
    """One pattern code in {1, 2, 3, 4} per record."""
    probs = missingness_probs(y, w1, w2, z, alpha, gamma)
    cumulative = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    return 1 + np.minimum((u[:, None] >= cumulative).sum(axis=1), 3)


def _draw_levels(spec: DiscreteSpec, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, List[Level]]:
    levels = spec.levels()
    return spec.draw(rng, n), levels


def _surrogates(
    config: StudyConfig,
    x1_idx: np.ndarray,
    x2_idx: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    x1 = np.asarray(config.x1.support)[x1_idx]
    x2 = np.asarray(config.x2.support)[x2_idx]

    if config.surrogate.kind == "threshold":
        return (x1 > 0).astype(float), (x2 > 0).astype(float)

    out = []
    for spec, table, idx in ((config.x1, config.surrogate.w1, x1_idx), (config.x2, config.surrogate.w2, x2_idx)):
        w = np.empty(idx.size)
        u = rng.random(idx.size)
        for k, level in enumerate(spec.levels()):
            conditional = table[level.token]
            rows = idx == k
            cumulative = np.cumsum(conditional.probs)
            pick = np.searchsorted(cumulative, u[rows], side="right").clip(max=len(cumulative) - 1)
            w[rows] = np.asarray(conditional.support)[pick]
        out.append(w)
    return out[0], out[1]


def generate(config: StudyConfig, rng: np.random.Generator) -> Tuple[Dataset, Dataset]:
    """
    One sample under ``config``.

    Returns (full, observed): the complete data and the same records
    with X blocks masked by the drawn patterns and any extra masks.
    """
    n = config.n
    b0, b1, b2, b3 = config.beta_true

    x1_idx, x1_levels = _draw_levels(config.x1, rng, n)
    x2_idx, x2_levels = _draw_levels(config.x2, rng, n)
    z_idx, z_levels = _draw_levels(config.z, rng, n)

    x1 = np.asarray(config.x1.support)[x1_idx]
    x2 = np.asarray(config.x2.support)[x2_idx]
    z = np.asarray(config.z.support)[z_idx]

    y = (rng.random(n) < inv_logit(b0 + b1 * x1 + b2 * x2 + b3 * z)).astype(np.int8)
    w1, w2 = _surrogates(config, x1_idx, x2_idx, rng)
    delta = gen_missingness(y, w1, w2, z, config.alpha, config.gamma, rng)

    x1_rows = [(x1_levels[k],) for k in x1_idx]
    x2_rows = [(x2_levels[k],) for k in x2_idx]
    z_rows = [(z_levels[k],) for k in z_idx]
    w_rows = [(Level.of(a), Level.of(b)) for a, b in zip(w1.tolist(), w2.tolist())]

    full = Dataset.from_arrays(y=y, x1=x1_rows, x2=x2_rows, z=z_rows, w=w_rows, layout=LAYOUT)

    observed = Dataset.from_arrays(
        y=y,
        x1=[row if d in (1, 3) else None for row, d in zip(x1_rows, delta)],
        x2=[row if d in (1, 2) else None for row, d in zip(x2_rows, delta)],
        z=z_rows,
        w=w_rows,
        layout=LAYOUT,
    )

    for spec in config.masks:
        observed = mask_block(observed, spec, rng)

    return full, observed


def gen_dataset(config: StudyConfig, rng: np.random.Generator) -> Dataset:
    """Observed sample only; see :func:`generate`."""
    return generate(config, rng)[1]


def mask_block(dataset: Dataset, spec: MaskSpec, rng: np.random.Generator) -> Dataset:
    """
    Additionally hide ``spec.block`` where a Bernoulli draw with success
    H(intercept + y Y + z'Z + w'W) fails; patterns are recomputed.
    """
    s, p, q, r = dataset.dims
    if len(spec.z) != q or len(spec.w) != r:
        raise ValueError(f"mask coefficients need {q} z and {r} w entries")

    z = np.array([[Level(t).numeric for t in row] for row in dataset.z]).reshape(dataset.n, q)
    w = np.array([[Level(t).numeric for t in row] for row in dataset.w]).reshape(dataset.n, r)

    linear = spec.intercept + spec.y * dataset.y + z @ np.asarray(spec.z) + w @ np.asarray(spec.w)
    keep = rng.random(dataset.n) < inv_logit(linear)

    masked = dataset.with_masked(spec.block, ~keep)

    logger.debug(
        "[GENERATOR] Masked %s | hidden=%d | patterns=%s",
        spec.block,
        int((~keep).sum()),
        masked.pattern_counts(),
    )
    return masked
