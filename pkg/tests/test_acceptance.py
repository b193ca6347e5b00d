"""Acceptance criteria 1-10, each checked against an independent oracle.

Every criterion prints one ``[PASS]``/``[FAIL]`` line with its runtime; the
lines are also collected into the pytest terminal summary. Run standalone
with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import functools
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from credal_uq.baselines import (  # noqa: E402
    entropy_upper,
    generalized_hartley,
    hartley_aleatoric,
    moebius_transform,
)
from credal_uq.ingest import inject_dirac_member  # noqa: E402
from credal_uq.measures import au_tv_lower, au_tv_upper, eu_tv, evaluate_tv, tu_tv  # noqa: E402
from credal_uq.selective import ScoredInstance, credal_predict, score_and_curve  # noqa: E402
from credal_uq.simplex import CredalSet, lower_probability, tv_distance  # noqa: E402
from credal_uq.synthetic import SyntheticConfig, generate  # noqa: E402

from oracles import (  # noqa: E402
    binary_credal,
    entropy_grid_search,
    envelope_gap_max,
    hull_samples,
    minimax_line_search,
    random_credal,
)

RESULTS: dict[int, tuple[bool, str, float, str]] = {}


def criterion(number: int, title: str, budget: float | None = None):
    """Time the check, enforce the runtime budget and record one result line."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            ok, detail = False, ""
            try:
                detail = fn(*args, **kwargs) or ""
                elapsed = time.perf_counter() - t0
                if budget is not None:
                    assert elapsed < budget, f"runtime {elapsed:.1f}s exceeds the {budget:g}s budget"
                ok = True
            except AssertionError as exc:
                detail = str(exc).splitlines()[0] if str(exc) else "assertion failed"
                raise
            finally:
                elapsed = time.perf_counter() - t0
                RESULTS[number] = (ok, title, elapsed, detail)
                print(format_result(number))

        return run

    return wrap


def format_result(number: int) -> str:
    ok, title, elapsed, detail = RESULTS[number]
    tag = "PASS" if ok else "FAIL"
    tail = f" ({detail})" if detail else ""
    return f"[{tag}] criterion {number:2d}: {title} [{elapsed:.2f}s]{tail}"


def _cs(P):
    return CredalSet._trusted(np.asarray(P, dtype=float))


@criterion(1, "binary recovery of closed forms", budget=1.0)
def test_c01_binary_recovery():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(1000):
        a, b = np.sort(rng.random(2))
        rec = evaluate_tv(_cs(binary_credal(a, b)))
        errs = [
            rec.tu - min(1 - a, b),
            rec.au.lo - min(a, 1 - b),
            rec.eu - (b - a) / 2,
            rec.tu - (rec.au.lo + 2 * rec.eu),
        ]
        worst = max(worst, max(abs(e) for e in errs))
    assert worst <= 1e-12, f"max deviation {worst:.3g}"
    return f"max deviation {worst:.1e}"


@criterion(2, "eu equals half the largest envelope gap over all events", budget=10.0)
def test_c02_mmi_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(200):
        k, m = int(rng.integers(2, 13)), int(rng.integers(1, 9))
        P = random_credal(rng, k, m)
        worst = max(worst, abs(eu_tv(_cs(P)) - 0.5 * envelope_gap_max(P)))
    assert worst <= 1e-12, f"max deviation {worst:.3g}"
    return f"max deviation {worst:.1e}"


@criterion(3, "closed forms equal brute force bit for bit", budget=10.0)
def test_c03_closed_form_vs_brute_force():
    rng = np.random.default_rng(103)
    eye_cache: dict[int, np.ndarray] = {}
    for i in range(10_000):
        k, m = int(rng.integers(2, 101)), int(rng.integers(1, 9))
        P = random_credal(rng, k, m)
        cs = _cs(P)
        eye = eye_cache.setdefault(k, np.eye(k))
        if i % 50 == 0:
            # scalar path through the library's own distance function
            brute = min(max(tv_distance(p, eye[y]) for p in P) for y in range(k))
        else:
            # TV to a Dirac from its definition: 1 - overlap of the two vectors
            dist = 1.0 - np.minimum(P[:, None, :], eye[None, :, :]).sum(axis=2)
            brute = float(dist.max(axis=0).min())
        assert tu_tv(cs) == brute, f"tu mismatch on case {i}: {tu_tv(cs)!r} vs {brute!r}"
        lo = min(1.0 - max(row) for row in P.tolist())
        assert au_tv_lower(cs) == lo, f"au.lo mismatch on case {i}"
    return "10^4 sets, K <= 100"


@criterion(4, "hull samples stay inside the reported bounds", budget=30.0)
def test_c04_hull_consistency():
    rng = np.random.default_rng(104)
    for i in range(500):
        k, m = int(rng.integers(2, 21)), int(rng.integers(1, 9))
        P = random_credal(rng, k, m)
        rec = evaluate_tv(_cs(P))
        Q = hull_samples(rng, P, 1000)
        au = 1.0 - Q.max(axis=1)
        assert au.min() >= rec.au.lo - 1e-9, f"case {i}: sampled AU below au.lo"
        assert au.max() <= rec.au.hi + 1e-9, f"case {i}: sampled AU above au.hi"
        R = hull_samples(rng, P, 1000)
        half_tv = 0.5 * 0.5 * np.abs(Q - R).sum(axis=1)
        assert half_tv.max() <= rec.eu + 1e-9, f"case {i}: sampled half-TV above eu"
        # TV(q, dirac_y) = 1 - q(y); the sampled sup per label bounds tu from below
        profile = (1.0 - Q).max(axis=0)
        assert profile.min() <= rec.tu + 1e-9, f"case {i}: sampled distance profile above tu"
    return "500 sets x 10^3 points"


@criterion(5, "dominance and monotonicity under added generators")
def test_c05_dominance_monotonicity():
    rng = np.random.default_rng(105)
    for i in range(10_000):
        k, m = int(rng.integers(2, 101)), int(rng.integers(1, 33))
        P = random_credal(rng, k, m)
        cs = _cs(P)
        assert eu_tv(cs) <= tu_tv(cs) + 1e-12, f"case {i}: eu > tu"
        # the hull maximum of precise AU is attained at a generator bound by tu
        assert (1.0 - P.max(axis=1)).max() <= tu_tv(cs) + 1e-12, f"case {i}: generator AU > tu"
    for i in range(1000):
        k, m = int(rng.integers(2, 30)), int(rng.integers(1, 10))
        P = random_credal(rng, k, m)
        small = evaluate_tv(_cs(P))
        big = evaluate_tv(_cs(np.vstack([P, rng.dirichlet(np.ones(k) * rng.choice([0.2, 1.0]))])))
        assert small.au.hi <= small.tu + 1e-12 and big.au.hi <= big.tu + 1e-12, f"case {i}: au.hi > tu"
        assert big.tu >= small.tu - 1e-12, f"case {i}: tu decreased"
        assert big.eu >= small.eu - 1e-12, f"case {i}: eu decreased"
        assert big.au.hi >= small.au.hi - 1e-12, f"case {i}: au.hi decreased"
        assert big.au.lo <= small.au.lo + 1e-12, f"case {i}: au.lo increased"
    return "10^4 dominance, 10^3 monotonicity cases"


@criterion(6, "optimizers agree with line and grid searches", budget=60.0)
def test_c06_optimizer_oracles():
    rng = np.random.default_rng(106)
    worst_lp = 0.0
    for _ in range(1000):
        P = random_credal(rng, int(rng.integers(2, 21)), 2)
        worst_lp = max(worst_lp, abs(au_tv_upper(_cs(P)) - (1.0 - minimax_line_search(P))))
    assert worst_lp <= 1e-6, f"au.hi vs line search {worst_lp:.3g}"
    worst_h = 0.0
    for _ in range(200):
        m = int(rng.integers(2, 4))
        P = random_credal(rng, int(rng.integers(2, 9)), m)
        worst_h = max(worst_h, abs(entropy_upper(_cs(P)) - entropy_grid_search(P)))
    assert worst_h <= 1e-5, f"entropy vs grid search {worst_h:.3g}"
    return f"LP {worst_lp:.1e}, entropy {worst_h:.1e}"


@criterion(7, "Hartley special cases and exact decomposition")
def test_c07_hartley():
    rng = np.random.default_rng(107)
    for k in range(2, 13):
        p = rng.dirichlet(np.ones(k))
        assert generalized_hartley(_cs([p])) == 0.0, f"GH(precise) != 0 at K={k}"
        assert generalized_hartley(_cs([p, p, p])) == 0.0, f"GH(repeated precise) != 0 at K={k}"
        assert generalized_hartley(_cs(np.eye(k))) == math.log2(k), f"GH(vacuous) != log2 K at K={k}"
    worst = 0.0
    for i in range(500):
        k, m = int(rng.integers(2, 13)), int(rng.integers(1, 9))
        cs = _cs(random_credal(rng, k, m))
        worst = max(worst, abs(moebius_transform(cs).sum() - 1.0))
        u, g = entropy_upper(cs), generalized_hartley(cs)
        assert hartley_aleatoric(cs) + g == u, f"case {i}: aleatoric + GH != upper entropy"
    assert worst <= 1e-9, f"Moebius mass off by {worst:.3g}"
    return f"mass error {worst:.1e}"


def _planted_records(rng, n, error_rate, scores):
    wrong = np.zeros(n, dtype=bool)
    wrong[rng.choice(n, int(round(error_rate * n)), replace=False)] = True
    return wrong, [
        ScoredInstance(str(i), 0, 1 if wrong[i] else 0, (scores(wrong[i]),)) for i in range(n)
    ]


@criterion(8, "harness: oracle and constant rankings")
def test_c08_harness():
    rng = np.random.default_rng(108)
    n = 10_000
    wrong, recs = _planted_records(rng, n, 0.2, lambda w: float(w))
    curve = score_and_curve(recs, 30)
    assert curve.mr == 1.0, f"oracle MR {curve.mr}"
    assert curve.accuracy[-1] == 1.0, f"terminal accuracy {curve.accuracy[-1]}"
    base = 1.0 - wrong.mean()
    # constant scores: ties keep input order, and the errors sit at random positions
    _, recs = _planted_records(rng, n, 0.2, lambda w: 0.0)
    const = score_and_curve(recs, 30)
    assert abs(const.auc - base) <= 0.02, f"constant AUC {const.auc:.4f} vs base {base:.4f}"
    return f"oracle MR 1.0, constant AUC {const.auc:.4f} vs base {base:.4f}"


@criterion(9, "desk-scale selective prediction with tu, and its speed", budget=300.0)
def test_c09_desk_scale():
    ds, _ = generate(SyntheticConfig(k=10, n=10_000, m=10, noise=1.0, seed=2024))
    sets = [inst.credal_set for inst in ds.instances]
    labels = [inst.label for inst in ds.instances]
    predicted = [credal_predict(cs) for cs in sets]

    entropy_upper(sets[0])  # exclude one-off JIT compilation from the timing
    t0 = time.perf_counter()
    tu = [tu_tv(cs) for cs in sets]
    t_tu = time.perf_counter() - t0
    t0 = time.perf_counter()
    for cs in sets:
        entropy_upper(cs)
    t_ent = time.perf_counter() - t0

    def curve_for(keys):
        recs = [ScoredInstance(str(i), predicted[i], labels[i], (keys[i],)) for i in range(len(sets))]
        return score_and_curve(recs, 30)

    tu_auc = curve_for(tu).auc
    random_auc = curve_for(np.random.default_rng(7).random(len(sets)).tolist()).auc
    gain, speedup = tu_auc - random_auc, t_ent / t_tu
    assert gain >= 0.03, f"tu AUC {tu_auc:.4f} vs random {random_auc:.4f}"
    assert speedup >= 10, f"tu only {speedup:.1f}x faster than upper entropy"
    return f"AUC tu {tu_auc:.4f} vs random {random_auc:.4f}; tu {t_tu:.3f}s vs entropy {t_ent:.2f}s"


@criterion(10, "injected Dirac member anchors tu and never lowers eu")
def test_c10_dirac_anchor():
    checked = 0
    for cfg in (SyntheticConfig(k=6, n=2000, m=5, noise=1.5, seed=10), SyntheticConfig(k=3, n=2000, m=2, noise=4.0, seed=11)):
        ds, _ = generate(cfg)
        for y in range(cfg.k):
            out = inject_dirac_member(ds, y)
            for before, after in zip(ds.instances, out.instances):
                cs = after.credal_set
                assert tu_tv(cs) == 1.0 - lower_probability(cs, {y}), f"{after.instance_id}: tu not anchored"
                assert eu_tv(cs) >= eu_tv(before.credal_set), f"{after.instance_id}: eu decreased"
                checked += 1
    return f"{checked} augmented instances"


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((n, f) for n, f in globals().items() if n.startswith("test_c")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
