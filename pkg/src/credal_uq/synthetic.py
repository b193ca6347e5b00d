"""Synthetic ensembles with a known data-generating process.

Each instance gets a true conditional drawn uniformly from the simplex and a
label drawn from it. Ensemble members are the true conditional perturbed by
Gaussian noise in log space and mapped back with a softmax, so ``noise``
directly controls how far members disagree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import Instance, PredictionDataset, _default_ids
from .simplex import CredalSet


@dataclass(frozen=True)
class SyntheticConfig:
    k: int
    n: int
    m: int
    noise: float
    seed: int = 0

    def __post_init__(self):
        if self.k < 2 or self.n < 1 or self.m < 1:
            raise ValueError("need k >= 2, n >= 1, m >= 1")
        if not self.noise >= 0:
            raise ValueError("noise must be nonnegative")


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def generate(config: SyntheticConfig) -> tuple[PredictionDataset, np.ndarray]:
    """Return the dataset and the ``(n, k)`` array of true conditionals."""
    rng = np.random.default_rng(config.seed)
    k, n, m = config.k, config.n, config.m
    truth = rng.dirichlet(np.ones(k), size=n)
    u = rng.random(n)[:, None]
    labels = np.minimum((np.cumsum(truth, axis=1) <= u).sum(axis=1), k - 1)
    if config.noise == 0:
        members = np.repeat(truth[:, None, :], m, axis=1)
    else:
        logits = np.log(np.maximum(truth, 1e-300))[:, None, :]
        members = _softmax(logits + config.noise * rng.standard_normal((n, m, k)))
    width = len(str(n - 1))
    instances = tuple(
        Instance(f"s{i:0{width}d}", CredalSet._trusted(members[i]), int(labels[i])) for i in range(n)
    )
    return PredictionDataset(instances, _default_ids(m)), truth
