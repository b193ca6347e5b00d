"""Entropy- and Hartley-based uncertainty measures for credal sets.

Used as comparison points for the TV measures. Entropy envelopes follow the
usual additive split (upper entropy as total, lower entropy as aleatoric,
their difference as epistemic). The generalized Hartley measure is computed
from the Moebius inverse of the lower probability and needs all ``2^K``
events, so it is capped at a configurable ``K``.
"""

from __future__ import annotations

import logging

import numpy as np

from .optimize import maximize_entropy_over_hull
from .simplex import CredalSet, Distribution

logger = logging.getLogger(__name__)

HARTLEY_K_MAX = 14


class HartleyUnavailable(ValueError):
    """The label set is too large for an exact Moebius transform."""


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    q = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    q = q[q > 0]
    return float(-(q * np.log2(q)).sum())


def _row_entropies(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log2(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(axis=1)


def entropy_lower(cs: CredalSet) -> float:
    # Entropy is concave, so its minimum over the hull sits at a generator.
    return float(_row_entropies(cs.probs).min())


def entropy_upper(cs: CredalSet) -> float:
    return maximize_entropy_over_hull(cs).optimum


def entropy_epistemic(cs: CredalSet) -> float:
    return entropy_upper(cs) - entropy_lower(cs)


def _check_cap(k: int, k_max: int) -> None:
    if k > k_max:
        raise HartleyUnavailable(
            f"generalized Hartley needs all 2^K events; K={k} exceeds the cap of {k_max}. "
            "Report it as unavailable ('--') or raise hartley_k_max."
        )


def subset_lower_probabilities(cs: CredalSet, k_max: int = HARTLEY_K_MAX) -> np.ndarray:
    """Lower probability of every event, indexed by bitmask (bit ``y`` = label ``y``)."""
    _check_cap(cs.k, k_max)
    P = cs.probs
    sums = np.zeros((P.shape[0], 1))
    for y in range(cs.k):
        sums = np.concatenate([sums, sums + P[:, y : y + 1]], axis=1)
    lower = sums.min(axis=0)
    lower[0] = 0.0
    lower[-1] = 1.0
    return lower


def moebius_transform(cs: CredalSet, k_max: int = HARTLEY_K_MAX) -> np.ndarray:
    """Moebius inverse of the lower probability, as an array over bitmasks.

    ``m(A) = sum_{B subset A} (-1)^{|A \\ B|} lower(B)``, computed by the fast
    subset transform (one pass per label) instead of the double sum.
    """
    P = cs.probs
    if np.all(P == P[0]):
        # Precise set: the lower probability is additive, mass sits on singletons.
        _check_cap(cs.k, k_max)
        m = np.zeros(1 << cs.k)
        m[1 << np.arange(cs.k)] = P[0]
        return m
    m = subset_lower_probabilities(cs, k_max).copy()
    n = m.shape[0]
    for y in range(cs.k):
        step = 1 << y
        view = m.reshape(n // (2 * step), 2, step)
        view[:, 1, :] -= view[:, 0, :]
    return m


def _popcount(n_bits: int) -> np.ndarray:
    counts = np.zeros(1, dtype=np.int64)
    for _ in range(n_bits):
        counts = np.concatenate([counts, counts + 1])
    return counts


def generalized_hartley(cs: CredalSet, k_max: int = HARTLEY_K_MAX) -> float:
    """``sum_A m(A) log2 |A|`` with ``log2 |{}| := 0``."""
    m = moebius_transform(cs, k_max)
    sizes = _popcount(cs.k)
    logs = np.log2(np.maximum(sizes, 1))
    # Snap to the float grid of log2(K). Upper entropy never exceeds log2(K),
    # so its grid is at least as fine, and upper - GH is then computed exactly
    # (no rounding) whenever 0 <= GH <= 2 * upper. The snap moves GH by under
    # one ulp of log2(K), below the error of the Moebius sums.
    q = float(np.spacing(np.log2(cs.k)))
    gh = float(np.rint((m @ logs) / q) * q)
    if gh < -1e-9:
        logger.warning("negative generalized Hartley value %.3g", gh)
    return gh


def hartley_aleatoric(cs: CredalSet, k_max: int = HARTLEY_K_MAX) -> float:
    gh = generalized_hartley(cs, k_max)
    return entropy_upper(cs) - gh


def entropy_baselines(cs: CredalSet, hartley: bool = True, k_max: int = HARTLEY_K_MAX) -> dict:
    """All baseline scores for one credal set, sharing one upper-entropy solve.

    Hartley entries are omitted when ``hartley`` is False or ``K`` exceeds the
    cap.
    """
    upper = entropy_upper(cs)
    lower = entropy_lower(cs)
    out = {"entropy_upper": upper, "entropy_lower": lower, "entropy_eu": upper - lower}
    if hartley and cs.k <= k_max:
        gh = generalized_hartley(cs, k_max)
        out["hartley_gh"] = gh
        out["hartley_au"] = upper - gh
    return out

