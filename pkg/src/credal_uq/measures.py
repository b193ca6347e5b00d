"""Total, aleatoric and epistemic uncertainty under the total variation metric.

All measures are distances to full certainty (Dirac measures) or within the
credal set, and all reduce to arithmetic on the generators:

* total uncertainty ``1 - max_y min_j p_j(y)``;
* aleatoric uncertainty of one distribution ``1 - max_y p(y)``, lifted to the
  credal set as the interval of values it takes over the hull;
* epistemic uncertainty, half the hull's TV diameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .optimize import minimax_max_coordinate
from .simplex import CredalSet, Distribution

ARGMAX_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AUInterval:
    """Range ``[lo, hi]`` of aleatoric uncertainty over the credal set."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty AU interval [{self.lo}, {self.hi}]")

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class UncertaintyRecord:
    tu: float
    au: AUInterval
    eu: float
    baselines: Mapping[str, float] = field(default_factory=dict)


def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)


def tu_tv(cs: CredalSet) -> float:
    """Worst-case TV distance of the hull to its closest Dirac measure."""
    return 1.0 - float(cs.probs.min(axis=0).max())


def au_tv_precise(p) -> float:
    """Distance of ``p`` to the closest Dirac measure, i.e. its Bayes error."""
    return 1.0 - float(_probs(p).max())


def au_tv_lower(cs: CredalSet) -> float:
    return 1.0 - float(cs.probs.max(axis=1).max())


def shared_argmax(cs: CredalSet, tol: float = ARGMAX_TOLERANCE) -> int | None:
    """Lowest label that is an argmax (within ``tol``) of every generator."""
    P = cs.probs
    is_max = P >= P.max(axis=1, keepdims=True) - tol
    common = np.flatnonzero(is_max.all(axis=0))
    return int(common[0]) if common.size else None


def au_tv_upper(cs: CredalSet) -> float:
    """Largest aleatoric uncertainty attained anywhere in the hull.

    If every generator ranks one label first, the value is attained at a
    generator. Otherwise it is ``1 - t*`` with ``t*`` the smallest achievable
    largest-class probability over mixtures, found by linear programming.
    """
    y = shared_argmax(cs)
    if y is not None:
        return 1.0 - float(cs.probs[:, y].min())
    return 1.0 - minimax_max_coordinate(cs).optimum


def eu_tv(cs: CredalSet) -> float:
    """Half the largest pairwise TV distance between generators."""
    P = cs.probs
    best = 0.0
    for j in range(P.shape[0] - 1):
        d = np.abs(P[j + 1 :] - P[j]).sum(axis=1).max()
        if d > best:
            best = float(d)
    return 0.25 * best


def evaluate_tv(cs: CredalSet) -> UncertaintyRecord:
    lo = au_tv_lower(cs)
    hi = max(au_tv_upper(cs), lo)
    return UncertaintyRecord(tu=tu_tv(cs), au=AUInterval(lo, hi), eu=eu_tv(cs))
