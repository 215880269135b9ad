import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from owlopt.norms import (OscarParams, WeightVector, as_weights, decompose,
                          dual_norm, oscar_weights, owl_norm, recompose,
                          sort_invocations)

from oracles import naive_dual, naive_owl, random_weights


def finite_vectors(max_n=12, max_abs=1e6):
    return hnp.arrays(
        np.float64, st.integers(1, max_n),
        elements=st.floats(-max_abs, max_abs, allow_nan=False,
                           allow_infinity=False, width=64))


class TestWeightVector:
    def test_accepts_valid(self):
        w = WeightVector([3.0, 2.0, 2.0, 0.0])
        assert len(w) == 4
        np.testing.assert_array_equal(w.w, [3, 2, 2, 0])
        np.testing.assert_allclose(w.prefix_sums, [3, 5, 7, 7])
        assert w.mean == pytest.approx(7 / 4)

    @pytest.mark.parametrize("bad", [
        [1.0, 2.0],          # increasing
        [1.0, -0.5],         # negative entry
        [0.0, 0.0],          # leading zero
        [],                  # empty
        [np.nan, 0.0],       # non-finite
        [np.inf, 1.0],
    ])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            WeightVector(bad)

    def test_rejects_matrix(self):
        with pytest.raises(ValueError):
            WeightVector(np.ones((2, 2)))

    def test_arrays_read_only(self):
        w = WeightVector([2.0, 1.0])
        with pytest.raises(ValueError):
            w.w[0] = 5.0
        with pytest.raises(ValueError):
            w.prefix_sums[0] = 5.0

    def test_equality_and_passthrough(self):
        a = WeightVector([2.0, 1.0])
        assert a == WeightVector([2.0, 1.0])
        assert a != WeightVector([2.0, 0.5])
        assert as_weights(a) is a
        assert as_weights([2.0, 1.0]) == a

    def test_repr_mentions_length(self):
        assert "2" in repr(WeightVector([2.0, 1.0]))


class TestOscar:
    def test_worked_example(self):
        w = oscar_weights(OscarParams(1e-6, 2e-6), 3)
        np.testing.assert_allclose(w.w, [5e-6, 3e-6, 1e-6])

    def test_constant_when_slope_zero(self):
        np.testing.assert_array_equal(oscar_weights(OscarParams(1.0, 0.0), 3).w,
                                      [1.0, 1.0, 1.0])

    def test_pure_slope_hits_zero(self):
        np.testing.assert_array_equal(oscar_weights(OscarParams(0.0, 1.0), 2).w,
                                      [1.0, 0.0])

    @pytest.mark.parametrize("l1,l2", [(-1.0, 1.0), (1.0, -1.0), (0.0, 0.0),
                                       (np.nan, 1.0), (1.0, np.inf)])
    def test_param_validation(self, l1, l2):
        with pytest.raises(ValueError):
            OscarParams(l1, l2)

    @given(st.floats(1e-8, 1e3), st.floats(0, 1e3), st.integers(1, 60))
    def test_always_valid_weights(self, l1, l2, n):
        w = oscar_weights(OscarParams(l1, l2), n)
        assert len(w) == n
        assert np.all(np.diff(w.w) <= 0)


class TestDecompose:
    def test_worked_example(self):
        dec = decompose(np.array([3.0, -5.0, 2.0]))
        np.testing.assert_array_equal(dec.signs, [1.0, -1.0, 1.0])
        np.testing.assert_array_equal(dec.perm, [1, 0, 2])
        np.testing.assert_array_equal(dec.sorted_abs, [5.0, 3.0, 2.0])

    def test_tie_break_prefers_earlier_index(self):
        dec = decompose(np.array([2.0, -2.0]))
        np.testing.assert_array_equal(dec.perm, [0, 1])

    def test_zero_gets_zero_sign(self):
        dec = decompose(np.array([0.0, -1.0]))
        assert dec.signs[0] == 0.0

    @given(finite_vectors())
    def test_roundtrip_exact(self, v):
        np.testing.assert_array_equal(recompose(decompose(v)), v)

    @given(finite_vectors())
    def test_sorted_abs_is_sorted(self, v):
        dec = decompose(v)
        assert np.all(np.diff(dec.sorted_abs) <= 0)
        assert np.all(dec.sorted_abs >= 0)

    def test_recompose_with_replacement(self):
        dec = decompose(np.array([3.0, -5.0, 2.0]))
        out = recompose(dec, np.array([10.0, 20.0, 30.0]))
        # positions in magnitude order were 1, 0, 2; signs restored
        np.testing.assert_array_equal(out, [20.0, -10.0, 30.0])

    def test_recompose_replacement_keeps_zeros_zero(self):
        dec = decompose(np.array([0.0, 4.0]))
        out = recompose(dec, np.array([7.0, 7.0]))
        assert out[0] == 0.0 and out[1] == 7.0

    def test_recompose_length_mismatch(self):
        dec = decompose(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            recompose(dec, np.array([1.0]))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            decompose(np.array([np.nan, 1.0]))


class TestOwlNorm:
    def test_worked_example(self):
        assert owl_norm([3.0, 1.0], [2.0, 2.0]) == pytest.approx(8.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            owl_norm([1.0, 2.0, 3.0], [1.0, 1.0])

    @given(finite_vectors(max_n=10), st.integers(0, 2**32 - 1))
    def test_matches_naive(self, v, seed):
        w = random_weights(np.random.default_rng(seed), v.size)
        got = owl_norm(v, w)
        want = naive_owl(v, w)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)

    @given(finite_vectors(max_n=10, max_abs=1e3), st.data())
    def test_norm_axioms(self, v, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        w = random_weights(rng, v.size)
        ww = as_weights(w)
        val = owl_norm(v, w)
        assert val >= 0
        if np.any(v):
            assert val > 0
        c = data.draw(st.floats(-10, 10, allow_nan=False))
        assert owl_norm(c * v, w) == pytest.approx(abs(c) * val, rel=1e-9, abs=1e-9)
        u = rng.standard_normal(v.size)
        assert owl_norm(v + u, w) <= owl_norm(u, w) + val + 1e-9 * (1 + val)
        # sandwiched between the scaled l1 norms
        l1 = float(np.abs(v).sum())
        assert ww.mean * l1 <= val + 1e-9 * (1 + val)
        assert val <= ww.w[0] * l1 + 1e-9 * (1 + val)


class TestDualNorm:
    @pytest.mark.parametrize("v,w,want", [
        ([3.0, 1.0], [2.0, 2.0], 1.5),
        ([3.0, 1.0], [2.0, 0.0], 2.0),
        ([3.0, 1.0], [2.0, 1.0], 1.5),
    ])
    def test_worked_examples(self, v, w, want):
        assert dual_norm(v, w) == pytest.approx(want, abs=1e-15)

    @given(finite_vectors(max_n=10, max_abs=1e3), st.integers(0, 2**32 - 1))
    def test_matches_naive(self, v, seed):
        w = random_weights(np.random.default_rng(seed), v.size)
        assert dual_norm(v, w) == pytest.approx(naive_dual(v, w),
                                                rel=1e-12, abs=1e-12)

    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_generalized_cauchy_schwarz(self, n, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(n)
        z = rng.standard_normal(n)
        w = random_weights(rng, n)
        lhs = abs(float(x @ z))
        rhs = owl_norm(x, w) * dual_norm(z, w)
        assert lhs <= rhs * (1 + 1e-12) + 1e-12


def test_sort_counter_increments():
    before = sort_invocations()
    decompose(np.array([3.0, 1.0, 2.0]))
    owl_norm([1.0, 2.0], [1.0, 1.0])
    assert sort_invocations() >= before + 2
