"""Residual effect uncertainty k of a model class."""

import logging

import numpy as np
from scipy import sparse
from scipy.spatial import KDTree
from scipy.stats import entropy

from app.enumeration.admissible import quantize_laws
from app.enumeration.batch import BatchEvaluator, map_blocks, split_blocks
from app.enumeration.grid import ModelClass
from app.metrics.identification import tau_bins

logger = logging.getLogger(__name__)


def residual_k(
    model_class: ModelClass,
    quantum: float = 1e-6,
    bins: int = 41,
    epsilon: float = 0.02,
    *,
    cap: int = 100_000_000,
    block_size: int = 65_536,
    parallel: int = 1,
) -> float:
    """Smallest tau entropy (bits) over the observationally equivalent groups of the class.

    Members are grouped by their observed law rounded to `quantum`. Each group
    pools the tau histograms of every group whose law lies within `epsilon`
    total variation of its own; k is the lowest entropy among the pools of
    groups holding at least one interior model (every parameter strictly
    between 0 and 1). A grid without interior points falls back to all groups.

    Raises:
        SizeOverflow: If the class is larger than `cap`.
    """
    model_class.check_size(cap)
    evaluator = BatchEvaluator(model_class)

    def run(block: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        theta = model_class.thetas(block)
        laws = evaluator.observed_laws(evaluator.joint(theta))
        interior = ((theta > 0.0) & (theta < 1.0)).all(axis=1)
        return laws, tau_bins(evaluator.tau(theta), bins), interior

    indices = np.arange(model_class.size, dtype=np.int64)
    parts = map_blocks(run, split_blocks(indices, block_size), parallel)
    laws = np.concatenate([p[0] for p in parts])
    taus = np.concatenate([p[1] for p in parts])
    interior = np.concatenate([p[2] for p in parts])

    keys, inverse = quantize_laws(laws, quantum)
    cells = keys.shape[0]
    counts = np.bincount(inverse * bins + taus, minlength=cells * bins).reshape(cells, bins)

    points = keys.astype(np.float64) * quantum
    pairs = KDTree(points).query_pairs(r=2.0 * epsilon, p=1.0, output_type="ndarray")
    rows = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(cells)])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(cells)])
    neighbours = sparse.coo_matrix(
        (np.ones(rows.shape[0], dtype=np.int64), (rows, cols)), shape=(cells, cells)
    ).tocsr()
    pooled = np.asarray(neighbours @ counts, dtype=np.float64)

    counted = np.bincount(inverse, weights=interior, minlength=cells) > 0
    if not counted.any():
        logger.warning("No interior grid model; k taken over every group")
        counted[:] = True

    k = max(0.0, float(entropy(pooled[counted], base=2, axis=1).min()))
    logger.info(
        f"Residual k = {k:.6f} bits over {int(counted.sum())} of {cells} observational groups "
        f"({pairs.shape[0]} neighbour pairs)"
    )
    return k
