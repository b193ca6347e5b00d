"""Per-instance scoring of a dataset and the report rows built from it."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from . import baselines, measures
from .ingest import Instance, PredictionDataset
from .selective import ScoredInstance, credal_predict

MEASURES = ("tu", "au", "eu", "entropy", "hartley")
THREADS_ENV = "CREDAL_UQ_THREADS"

# (measure family, component) -> report columns forming the ranking key.
SCORE_COLUMNS = {
    ("tv", "tu"): ("tu",),
    ("tv", "au"): ("au_lo", "au_hi"),
    ("tv", "eu"): ("eu",),
    ("entropy", "tu"): ("entropy_upper",),
    ("entropy", "au"): ("entropy_lower",),
    ("entropy", "eu"): ("entropy_eu",),
    ("hartley", "tu"): ("entropy_upper",),
    ("hartley", "au"): ("hartley_au",),
    ("hartley", "eu"): ("hartley_gh",),
}
# Reference rankings that need no uncertainty measure.
REFERENCE_MEASURES = ("oracle", "constant", "random")


def parse_measures(spec: str | Iterable[str]) -> tuple[str, ...]:
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    items = [s.strip() for s in items if s.strip()]
    unknown = [s for s in items if s not in MEASURES]
    if unknown:
        raise ValueError(f"unknown measures {unknown}; choose from {list(MEASURES)}")
    # canonical order keeps output independent of flag order
    return tuple(m for m in MEASURES if m in items)


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer")
        return n
    return os.cpu_count() or 1


def score_instance(
    inst: Instance, selected: Sequence[str], k_max: int = baselines.HARTLEY_K_MAX
) -> tuple[dict, dict]:
    """Report row for one instance, plus seconds spent per measure."""
    cs = inst.credal_set
    row: dict = {"id": inst.instance_id, "label": inst.label, "predicted": credal_predict(cs)}
    spent: dict = {}
    clock = time.perf_counter

    if "tu" in selected:
        t0 = clock()
        row["tu"] = measures.tu_tv(cs)
        spent["tu"] = clock() - t0
    if "au" in selected:
        t0 = clock()
        lo = measures.au_tv_lower(cs)
        row["au_lo"] = lo
        row["au_hi"] = max(measures.au_tv_upper(cs), lo)
        spent["au"] = clock() - t0
    if "eu" in selected:
        t0 = clock()
        row["eu"] = measures.eu_tv(cs)
        spent["eu"] = clock() - t0
    upper = None
    if "entropy" in selected:
        t0 = clock()
        upper = baselines.entropy_upper(cs)
        lower = baselines.entropy_lower(cs)
        row["entropy_upper"] = upper
        row["entropy_lower"] = lower
        row["entropy_eu"] = upper - lower
        spent["entropy"] = clock() - t0
    if "hartley" in selected:
        t0 = clock()
        gh = baselines.generalized_hartley(cs, k_max)
        if upper is None:
            upper = baselines.entropy_upper(cs)
            row["entropy_upper"] = upper
        row["hartley_gh"] = gh
        row["hartley_au"] = upper - gh
        spent["hartley"] = clock() - t0
    return row, spent


def _score_chunk(args):
    chunk, selected, k_max = args
    return [score_instance(inst, selected, k_max) for inst in chunk]


def score_dataset(
    ds: PredictionDataset,
    selected: Sequence[str],
    workers: int = 1,
    k_max: int = baselines.HARTLEY_K_MAX,
) -> tuple[list[dict], dict]:
    """Score every instance; rows come back in input order whatever ``workers`` is.

    Timings are per-measure sums of per-instance time over the whole set.
    """
    selected = tuple(selected)
    if "hartley" in selected and ds.k > k_max:
        raise baselines.HartleyUnavailable(
            f"generalized Hartley is unavailable for K={ds.k} (cap {k_max}); "
            "it is reported as '--' for such label sets"
        )
    instances = list(ds.instances)
    if workers <= 1 or len(instances) < 2:
        results = [score_instance(inst, selected, k_max) for inst in instances]
    else:
        size = max(1, -(-len(instances) // (workers * 4)))
        chunks = [instances[i : i + size] for i in range(0, len(instances), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_score_chunk, [(c, selected, k_max) for c in chunks]) for r in part]
    rows = [r for r, _ in results]
    timings = {m: 0.0 for m in selected}
    for _, spent in results:
        for m, t in spent.items():
            timings[m] += t
    return rows, timings


def score_keys(rows: Sequence[dict], measure: str, component: str, seed: int = 0) -> list[tuple[float, ...]]:
    """Ranking keys for ``rows`` under a measure family and component."""
    if measure == "oracle":
        return [(float(r["predicted"] != r["label"]),) for r in rows]
    if measure == "constant":
        return [(0.0,) for _ in rows]
    if measure == "random":
        rng = np.random.default_rng(seed)
        return [(float(v),) for v in rng.random(len(rows))]
    try:
        cols = SCORE_COLUMNS[(measure, component)]
    except KeyError:
        raise ValueError(f"unknown measure/component pair {measure}/{component}") from None
    missing = [c for c in cols if c not in rows[0]]
    if missing:
        raise ValueError(f"report lacks columns {missing}; rerun measure with the right --measures")
    return [tuple(float(r[c]) for c in cols) for r in rows]


def scored_instances(rows: Sequence[dict], keys: Sequence[tuple[float, ...]]) -> list[ScoredInstance]:
    return [
        ScoredInstance(str(r["id"]), int(r["predicted"]), r.get("label"), key) for r, key in zip(rows, keys)
    ]


def measures_for(measure: str, component: str) -> tuple[str, ...]:
    """Which ``MEASURES`` entries must be computed to rank by measure/component."""
    if measure in REFERENCE_MEASURES:
        return ()
    if measure == "tv":
        return (component,)
    if measure == "entropy":
        return ("entropy",)
    if measure == "hartley":
        return ("entropy", "hartley") if component == "tu" else ("hartley",)
    raise ValueError(f"unknown measure {measure!r}")
