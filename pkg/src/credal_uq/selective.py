"""Selective prediction: rank by uncertainty, reject, and track accuracy.

An accuracy-rejection (AR) curve records the accuracy on the instances that
remain after discarding the most uncertain fraction ``r``. Curves are
summarized by their span-normalized area (AUC) and by the Monotonicity Ratio,
the share of consecutive bins where accuracy does not drop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .simplex import CredalSet

DEFAULT_BINS = 30


@dataclass(frozen=True)
class ScoredInstance:
    instance_id: str
    predicted_label: int
    true_label: int | None
    score_key: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "score_key", tuple(float(v) for v in self.score_key))


@dataclass(frozen=True)
class ARCurve:
    rejection: np.ndarray
    accuracy: np.ndarray
    auc: float
    mr: float

    @property
    def bin_count(self) -> int:
        return int(self.rejection.shape[0])

    @property
    def bins(self) -> list[tuple[float, float]]:
        return list(zip(self.rejection.tolist(), self.accuracy.tolist()))


class MissingLabelError(ValueError):
    pass


def credal_predict(cs: CredalSet) -> int:
    """Plurality vote over generator argmaxes.

    Ties between vote leaders go to the label with the highest mean
    probability, then to the lowest label index.
    """
    P = cs.probs
    votes = np.bincount(P.argmax(axis=1), minlength=cs.k)
    leaders = np.flatnonzero(votes == votes.max())
    if leaders.size == 1:
        return int(leaders[0])
    mean = P.mean(axis=0)[leaders]
    return int(leaders[np.flatnonzero(mean == mean.max())[0]])


def rank_by_uncertainty(records: Sequence[ScoredInstance]) -> list[int]:
    """Indices from most to least uncertain; lexicographic on ``score_key``, stable."""
    if not records:
        raise ValueError("nothing to rank")
    for r in records:
        if not all(math.isfinite(v) for v in r.score_key):
            raise ValueError(f"non-finite score for instance {r.instance_id!r}")
    keys = [tuple(-v for v in r.score_key) for r in records]
    return sorted(range(len(records)), key=keys.__getitem__)


def tie_frequency(records: Sequence[ScoredInstance]) -> float:
    """Fraction of instances whose full score key is shared with another instance."""
    if not records:
        return 0.0
    keys = [r.score_key for r in records]
    counts: dict = {}
    for k in keys:
        counts[k] = counts.get(k, 0) + 1
    return sum(c for c in counts.values() if c > 1) / len(keys)


def _area(r: np.ndarray, a: np.ndarray) -> float:
    span = r[-1] - r[0]
    if span <= 0:
        return float(a[0])
    area = float(((a[1:] + a[:-1]) * np.diff(r)).sum() / 2.0)
    return area / span


def _monotone_share(a: np.ndarray) -> float:
    steps = np.round(np.diff(a), 12)
    return float((steps >= 0).mean())


def make_curve(rejection, accuracy) -> ARCurve:
    r = np.asarray(rejection, dtype=float)
    a = np.asarray(accuracy, dtype=float)
    if r.shape != a.shape or r.shape[0] < 2:
        raise ValueError("a curve needs at least two aligned bins")
    if np.any(np.diff(r) <= 0):
        raise ValueError("rejection fractions must be strictly increasing")
    return ARCurve(r, a, _area(r, a), _monotone_share(a))


def auc(curve: ARCurve) -> float:
    """Trapezoidal area under the curve divided by the covered rejection span.

    A flat curve at accuracy ``c`` therefore scores ``c``.
    """
    return _area(curve.rejection, curve.accuracy)


def monotonicity_ratio(curve: ARCurve) -> float:
    """Share of consecutive bins whose accuracy does not drop (steps rounded at 1e-12)."""
    return _monotone_share(curve.accuracy)


def accuracy_rejection_curve(
    ranked: Sequence[ScoredInstance], bin_count: int = DEFAULT_BINS
) -> ARCurve:
    """AR curve over ``ranked`` (already ordered from most to least uncertain).

    Bin ``i`` rejects the first ``ceil(i / B * N)`` instances, for ``i`` in
    ``0..B-1``, so the remainder is never empty.
    """
    n = len(ranked)
    if bin_count < 2:
        raise ValueError("bin_count must be at least 2")
    if n < bin_count:
        raise ValueError(f"need at least {bin_count} instances, got {n}")
    missing = [r.instance_id for r in ranked if r.true_label is None]
    if missing:
        raise MissingLabelError(f"{len(missing)} instances lack a true label, e.g. {missing[0]!r}")
    correct = np.array([r.predicted_label == r.true_label for r in ranked], dtype=float)
    # Suffix sums give the number correct among instances kept after each cut.
    kept_correct = np.concatenate([np.cumsum(correct[::-1])[::-1], [0.0]])
    rejection = np.arange(bin_count) / bin_count
    cut = np.array([-(-i * n // bin_count) for i in range(bin_count)])
    accuracy = kept_correct[cut] / (n - cut)
    return make_curve(rejection, accuracy)


def score_and_curve(records: Sequence[ScoredInstance], bin_count: int = DEFAULT_BINS) -> ARCurve:
    order = rank_by_uncertainty(records)
    return accuracy_rejection_curve([records[i] for i in order], bin_count)


def aggregate_curves(curves: Sequence[ARCurve]) -> dict:
    """Mean and sample standard deviation across curves sharing one bin grid."""
    if not curves:
        raise ValueError("no curves to aggregate")
    grid = curves[0].rejection
    for c in curves[1:]:
        if not np.array_equal(c.rejection, grid):
            raise ValueError("curves use different bin grids")
    acc = np.vstack([c.accuracy for c in curves])
    aucs = np.array([c.auc for c in curves])
    mrs = np.array([c.mr for c in curves])
    ddof = 1 if len(curves) > 1 else 0
    return {
        "rejection": grid,
        "accuracy_mean": acc.mean(axis=0),
        "accuracy_std": acc.std(axis=0, ddof=ddof),
        "auc_mean": float(aucs.mean()),
        "auc_std": float(aucs.std(ddof=ddof)),
        "mr_mean": float(mrs.mean()),
        "mr_std": float(mrs.std(ddof=ddof)),
    }
