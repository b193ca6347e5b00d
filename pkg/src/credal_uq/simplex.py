"""Distributions on the probability simplex and finitely generated credal sets.

A :class:`CredalSet` is stored by its generators only; every quantity in this
package is defined on the convex hull of those generators but evaluated on the
generators themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Sums inside this band are renormalized, outside it rejected.
SUM_TOLERANCE = 1e-6
# Negative entries down to this value are treated as rounding noise.
NEGATIVE_TOLERANCE = 1e-12
# Strict mode only forgives float noise at this level.
STRICT_SUM_TOLERANCE = 1e-9
# Sums closer to one than this are left untouched, so that re-loading a
# renormalized vector is the identity.
RENORMALIZE_ABOVE = 1e-10


class SimplexError(ValueError):
    """Raised when a vector cannot be accepted as a probability distribution."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


def _validate_probs(values, strict: bool = False, row: int | None = None) -> np.ndarray:
    p = np.array(values, dtype=float)
    if p.ndim != 1:
        raise SimplexError(f"expected a 1-d vector, got shape {p.shape}", row)
    if p.shape[0] < 2:
        raise SimplexError(f"need at least 2 labels, got {p.shape[0]}", row)
    if not np.all(np.isfinite(p)):
        raise SimplexError("non-finite probability entry", row)
    low = p.min()
    if low < 0:
        if strict or low < -NEGATIVE_TOLERANCE:
            raise SimplexError(f"negative probability {low!r}", row)
        p = np.clip(p, 0.0, None)
    total = p.sum()
    band = STRICT_SUM_TOLERANCE if strict else SUM_TOLERANCE
    if abs(total - 1.0) > band:
        raise SimplexError(f"probabilities sum to {total!r}, outside 1 +/- {band:g}", row)
    if abs(total - 1.0) > RENORMALIZE_ABOVE:
        p = p / total
    return p


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Distribution:
    """A categorical distribution over ``K >= 2`` labels.

    Entries summing to within ``1e-6`` of one are renormalized; tiny negative
    entries (above ``-1e-12``) are clamped to zero. Anything else raises
    :class:`SimplexError`. With ``strict=True`` only a ``1e-9`` band is
    tolerated and no clamping happens.
    """

    __slots__ = ("_probs",)

    def __init__(self, probs, strict: bool = False):
        self._probs = _frozen(_validate_probs(probs, strict=strict))

    @classmethod
    def dirac(cls, label: int, k: int) -> "Distribution":
        if not 0 <= label < k:
            raise IndexError(f"label {label} out of range for K={k}")
        p = np.zeros(k)
        p[label] = 1.0
        return cls(p)

    @classmethod
    def uniform(cls, k: int) -> "Distribution":
        return cls(np.full(k, 1.0 / k))

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def k(self) -> int:
        return self._probs.shape[0]

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, y):
        return self._probs[y]

    def __array__(self, dtype=None, copy=None):
        return self._probs if dtype is None else self._probs.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return bool(np.array_equal(self._probs, other._probs))

    def __hash__(self) -> int:
        return hash(self._probs.tobytes())

    def __repr__(self) -> str:
        return f"Distribution({self._probs.tolist()})"


class CredalSet:
    """Convex hull of ``M`` generator distributions over a common label set.

    Generators are kept in order and duplicates are preserved. The generator
    matrix is available as :attr:`probs` with shape ``(M, K)``.
    """

    __slots__ = ("_probs",)

    def __init__(self, generators: Iterable, strict: bool = False):
        rows = []
        for i, g in enumerate(generators):
            if isinstance(g, Distribution) and not strict:
                rows.append(g.probs)
            else:
                rows.append(_validate_probs(np.asarray(g, dtype=float), strict=strict, row=i))
        if not rows:
            raise ValueError("a credal set needs at least one generator")
        k = rows[0].shape[0]
        for i, r in enumerate(rows):
            if r.shape[0] != k:
                raise ValueError(f"generator {i} has {r.shape[0]} labels, expected {k}")
        self._probs = _frozen(np.vstack(rows))

    @classmethod
    def from_array(cls, probs, strict: bool = False) -> "CredalSet":
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 2:
            raise ValueError(f"expected an (M, K) array, got shape {probs.shape}")
        return cls(list(probs), strict=strict)

    @classmethod
    def _trusted(cls, probs: np.ndarray) -> "CredalSet":
        # Rows already validated; skips per-row checks.
        obj = cls.__new__(cls)
        obj._probs = _frozen(np.array(probs, dtype=float))
        return obj

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def m(self) -> int:
        return self._probs.shape[0]

    @property
    def k(self) -> int:
        return self._probs.shape[1]

    @property
    def generators(self) -> list[Distribution]:
        out = []
        for row in self._probs:
            d = Distribution.__new__(Distribution)
            d._probs = row
            out.append(d)
        return out

    def __len__(self) -> int:
        return self.m

    def with_generator(self, generator) -> "CredalSet":
        """Return a new credal set with ``generator`` appended."""
        g = generator.probs if isinstance(generator, Distribution) else _validate_probs(generator)
        if g.shape[0] != self.k:
            raise ValueError(f"generator has {g.shape[0]} labels, expected {self.k}")
        return CredalSet._trusted(np.vstack([self._probs, g]))

    def subset(self, indices: Sequence[int]) -> "CredalSet":
        idx = list(indices)
        if not idx:
            raise ValueError("a credal set needs at least one generator")
        return CredalSet._trusted(self._probs[idx])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CredalSet):
            return NotImplemented
        return bool(np.array_equal(self._probs, other._probs))

    def __hash__(self) -> int:
        return hash((self._probs.shape, self._probs.tobytes()))

    def __repr__(self) -> str:
        return f"CredalSet(M={self.m}, K={self.k})"


@dataclass(frozen=True)
class EnvelopePair:
    """Lower and upper probabilities of every singleton ``{y}``."""

    lower: np.ndarray
    upper: np.ndarray


def singleton_envelopes(cs: CredalSet) -> EnvelopePair:
    p = cs.probs
    return EnvelopePair(lower=_frozen(p.min(axis=0)), upper=_frozen(p.max(axis=0)))


def _event_mass(cs: CredalSet, event: Iterable[int]) -> np.ndarray:
    labels = sorted(set(int(y) for y in event))
    for y in labels:
        if not 0 <= y < cs.k:
            raise IndexError(f"label {y} out of range for K={cs.k}")
    if not labels:
        return np.zeros(cs.m)
    return cs.probs[:, labels].sum(axis=1)


def lower_probability(cs: CredalSet, event: Iterable[int]) -> float:
    """Smallest probability any member of ``cs`` assigns to ``event``."""
    labels = set(int(y) for y in event)
    mass = _event_mass(cs, labels)
    if not labels:
        return 0.0
    if len(labels) == cs.k:
        return 1.0
    return float(mass.min())


def upper_probability(cs: CredalSet, event: Iterable[int]) -> float:
    """Largest probability any member of ``cs`` assigns to ``event``."""
    labels = set(int(y) for y in event)
    mass = _event_mass(cs, labels)
    if not labels:
        return 0.0
    if len(labels) == cs.k:
        return 1.0
    return float(mass.max())


def tv_distance(p, q) -> float:
    """Total variation distance ``0.5 * sum_y |p(y) - q(y)|``.

    Evaluated through the overlap form ``1 - sum_y min(p(y), q(y))``, which is
    equal on the simplex and makes ``tv_distance(p, dirac(y)) == 1 - p(y)``
    hold bit for bit.
    """
    a = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    b = q.probs if isinstance(q, Distribution) else np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 1:
        raise ValueError(f"expected 1-d distributions, got shape {a.shape}")
    d = 1.0 - float(np.minimum(a, b).sum())
    return min(max(d, 0.0), 1.0)
