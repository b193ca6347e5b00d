import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credal_uq.simplex import (
    CredalSet,
    Distribution,
    SimplexError,
    lower_probability,
    singleton_envelopes,
    tv_distance,
    upper_probability,
)

from oracles import all_subsets, l1, random_credal


class TestDistribution:
    def test_accepts_valid(self):
        d = Distribution([0.2, 0.8])
        assert d.k == 2
        assert d[1] == 0.8

    def test_renormalizes_inside_band(self):
        d = Distribution([0.5, 0.5 + 5e-7])
        assert abs(d.probs.sum() - 1) < 1e-15

    def test_leaves_float_noise_untouched(self):
        # Re-loading an already normalized vector must be the identity.
        raw = np.array([0.1, 0.2, 0.7])
        assert np.array_equal(Distribution(raw).probs, raw)

    @pytest.mark.parametrize("bad", [[0.5, 0.7], [0.4, 0.4], [1.2, -0.2]])
    def test_rejects_outside_band(self, bad):
        with pytest.raises(SimplexError):
            Distribution(bad)

    def test_clamps_tiny_negative(self):
        d = Distribution([1.0 + 1e-13, -1e-13])
        assert d.probs.min() == 0.0

    def test_rejects_real_negative(self):
        with pytest.raises(SimplexError, match="negative"):
            Distribution([1.1, -0.1 + 1e-9])

    def test_strict_mode(self):
        with pytest.raises(SimplexError):
            Distribution([0.5, 0.5 + 5e-7], strict=True)
        with pytest.raises(SimplexError):
            Distribution([1.0 + 1e-13, -1e-13], strict=True)
        Distribution([0.5, 0.5 + 1e-12], strict=True)

    @pytest.mark.parametrize("bad", [[1.0], [[0.5, 0.5]], [np.nan, 1.0], [np.inf, 0.0]])
    def test_rejects_malformed(self, bad):
        with pytest.raises(SimplexError):
            Distribution(bad)

    def test_immutable(self):
        d = Distribution([0.3, 0.7])
        with pytest.raises(ValueError):
            d.probs[0] = 0.5

    def test_dirac_and_uniform(self):
        assert Distribution.dirac(2, 4).probs.tolist() == [0, 0, 1, 0]
        assert np.allclose(Distribution.uniform(4).probs, 0.25)
        with pytest.raises(IndexError):
            Distribution.dirac(4, 4)

    def test_equality_and_hash(self):
        assert Distribution([0.3, 0.7]) == Distribution([0.3, 0.7])
        assert len({Distribution([0.3, 0.7]), Distribution([0.3, 0.7])}) == 1


class TestCredalSet:
    def test_shape(self):
        cs = CredalSet([[0.2, 0.8], [0.7, 0.3], [0.7, 0.3]])
        assert (cs.m, cs.k) == (3, 2)
        # duplicates are kept
        assert len(cs.generators) == 3

    def test_rejects_empty_and_ragged(self):
        with pytest.raises(ValueError):
            CredalSet([])
        with pytest.raises(ValueError):
            CredalSet([[0.5, 0.5], [0.2, 0.3, 0.5]])

    def test_error_names_row(self):
        with pytest.raises(SimplexError) as exc:
            CredalSet([[0.5, 0.5], [0.6, 0.6]])
        assert exc.value.row == 1

    def test_from_array(self):
        cs = CredalSet.from_array(np.array([[0.1, 0.9], [0.4, 0.6]]))
        assert cs.probs.shape == (2, 2)
        with pytest.raises(ValueError):
            CredalSet.from_array(np.array([0.5, 0.5]))

    def test_with_generator_and_subset(self):
        cs = CredalSet([[0.2, 0.8]])
        bigger = cs.with_generator([0.7, 0.3])
        assert bigger.m == 2 and cs.m == 1
        assert bigger.subset([1]) == CredalSet([[0.7, 0.3]])
        with pytest.raises(ValueError):
            cs.with_generator([0.2, 0.3, 0.5])


class TestEnvelopes:
    def test_examples(self):
        e = singleton_envelopes(CredalSet([[0.2, 0.8], [0.7, 0.3]]))
        assert e.lower.tolist() == [0.2, 0.3] and e.upper.tolist() == [0.7, 0.8]
        e = singleton_envelopes(CredalSet([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3]]))
        assert e.lower.tolist() == [0.2, 0.3, 0.1] and e.upper.tolist() == [0.6, 0.5, 0.3]

    def test_singleton_set(self):
        p = [0.1, 0.6, 0.3]
        e = singleton_envelopes(CredalSet([p]))
        assert e.lower.tolist() == p == e.upper.tolist()

    def test_invariants_random(self, rng):
        for _ in range(200):
            P = random_credal(rng, rng.integers(2, 12), rng.integers(1, 8))
            e = singleton_envelopes(CredalSet.from_array(P))
            assert np.all(0 <= e.lower) and np.all(e.lower <= e.upper) and np.all(e.upper <= 1)
            assert e.lower.sum() <= 1 + 1e-12 <= e.upper.sum() + 2e-12

    def test_agrees_with_event_probabilities(self, rng):
        P = random_credal(rng, 5, 4)
        cs = CredalSet.from_array(P)
        e = singleton_envelopes(cs)
        for y in range(5):
            assert lower_probability(cs, {y}) == e.lower[y]
            assert upper_probability(cs, {y}) == e.upper[y]

    def test_event_probability_edges(self):
        cs = CredalSet([[0.2, 0.8], [0.7, 0.3]])
        assert lower_probability(cs, set()) == 0.0
        assert lower_probability(cs, {0, 1}) == 1.0
        assert upper_probability(cs, {0, 1}) == 1.0
        assert lower_probability(cs, {0}) == 0.2
        with pytest.raises(IndexError):
            lower_probability(cs, {2})

    def test_events_against_enumeration(self, rng):
        P = random_credal(rng, 4, 3)
        cs = CredalSet.from_array(P)
        for A in all_subsets(4):
            if 0 < len(A) < 4:
                masses = [sum(row[list(A)]) for row in P]
                assert lower_probability(cs, A) == pytest.approx(min(masses), abs=1e-15)
                assert upper_probability(cs, A) == pytest.approx(max(masses), abs=1e-15)


class TestTotalVariation:
    def test_examples(self):
        assert tv_distance([0.3, 0.7], [0.3, 0.7]) == 0
        assert tv_distance([1.0, 0.0], [0.0, 1.0]) == 1
        # 0.5 * (0.4 + 0.2 + 0.2)
        assert tv_distance(Distribution([0.6, 0.3, 0.1]), Distribution([0.2, 0.5, 0.3])) == pytest.approx(
            0.4, abs=1e-15
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tv_distance([0.5, 0.5], [0.2, 0.3, 0.5])

    def test_metric_axioms(self, rng):
        for _ in range(10_000):
            k = int(rng.integers(2, 51))
            p, q, r = rng.dirichlet(np.ones(k) * rng.choice([0.3, 1, 3]), size=3)
            d_pq, d_qp = tv_distance(p, q), tv_distance(q, p)
            assert d_pq >= 0 and d_pq == d_qp
            assert abs(d_pq - 0.5 * l1(p, q)) <= 1e-12
            assert tv_distance(p, p) <= 1e-12
            assert d_pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12

    def test_distance_to_dirac_is_exact(self, rng):
        for _ in range(2000):
            k = int(rng.integers(2, 60))
            p = rng.dirichlet(np.ones(k))
            for y in range(k):
                assert tv_distance(p, np.eye(k)[y]) == 1.0 - p[y]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=12))
def test_normalized_input_round_trips(weights):
    p = np.array(weights) / np.sum(weights)
    d = Distribution(p)
    assert np.abs(d.probs - p).max() <= 1e-15
    assert abs(d.probs.sum() - 1) <= 1e-9
