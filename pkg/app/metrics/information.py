"""Entropy of the identified set and divergence of the observed table, in bits."""

import logging
from typing import TYPE_CHECKING

import numpy as np
from scipy.stats import entropy

from app.causal.tables import ScopeMismatch
from app.metrics.identification import DEFAULT_BINS, member_taus, tau_histogram
from app.models.domain import BreadthReport, EntropyReport

if TYPE_CHECKING:
    from app.operators.state import EvidentialState

logger = logging.getLogger(__name__)

# Tables closer than this count as equal for the divergence.
EQUAL_TABLES_TOLERANCE = 1e-12


def histogram_entropy(counts: np.ndarray) -> float:
    """Shannon entropy in bits of a histogram of counts."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.sum() <= 0:
        return 0.0
    return max(0.0, float(entropy(counts, base=2)))


def state_entropy(state: "EvidentialState", bins: int = DEFAULT_BINS) -> float:
    return histogram_entropy(tau_histogram(member_taus(state), bins))


def delta_cause(state: "EvidentialState", bins: int = DEFAULT_BINS) -> EntropyReport:
    """Entropy drop of the tau histogram from the origin state to `state`.

    Members are weighted uniformly.
    """
    h_prior = state_entropy(state.root, bins)
    h_state = h_prior if state.origin is None else state_entropy(state, bins)
    return EntropyReport(
        h_prior=h_prior, h_state=h_state, delta_cause=h_prior - h_state, bins=bins
    )


def kl_bits(p: np.ndarray, q: np.ndarray) -> tuple[float | None, bool]:
    """KL(p || q) in bits and whether q dominates p; None when it does not."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    dominated = not bool(np.any((p > 0.0) & (q <= 0.0)))
    if not dominated:
        return None, False
    if np.allclose(p, q, rtol=0.0, atol=EQUAL_TABLES_TOLERANCE):
        return 0.0, True
    return max(0.0, float(entropy(p, q, base=2))), True


def delta_breadth(state: "EvidentialState") -> BreadthReport:
    """Divergence of the state's observed table from the full-population table.

    Raises:
        ScopeMismatch: If the two tables are over different variables.
    """
    full = state.root.observed
    if state.observed.scope != full.scope:
        raise ScopeMismatch(state.observed.scope, full.scope)
    divergence, dominated = kl_bits(state.observed.probs, full.probs)
    if not dominated:
        logger.info(f"Observed table after {len(state.trace)} steps is not dominated by the full table")
    return BreadthReport(kl_bits=divergence, dominated=dominated)
