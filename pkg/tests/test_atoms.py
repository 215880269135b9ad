import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from owlopt.atoms import Atom, SignedAtom, base_atoms, enumerate_atoms, linear_oracle
from owlopt.norms import dual_norm, owl_norm
from owlopt.proximal import OwlBall

from oracles import random_weights


class TestAtom:
    def test_materialize(self):
        a = Atom(level=2, tau=0.5, n=4)
        np.testing.assert_array_equal(a.materialize(), [0.5, 0.5, 0.0, 0.0])

    def test_base_atoms_constant_weights(self):
        got = [a.materialize() for a in base_atoms([1.0, 1.0])]
        np.testing.assert_allclose(got[0], [1.0, 0.0])
        np.testing.assert_allclose(got[1], [0.5, 0.5])

    def test_base_atoms_zero_tail(self):
        got = [a.materialize() for a in base_atoms([1.0, 0.0])]
        np.testing.assert_allclose(got[0], [1.0, 0.0])
        np.testing.assert_allclose(got[1], [1.0, 1.0])

    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_base_atoms_have_unit_norm(self, n, seed):
        w = random_weights(np.random.default_rng(seed), n)
        for a in base_atoms(w):
            assert owl_norm(a.materialize(), w) == pytest.approx(1.0, rel=1e-12)


class TestSignedAtom:
    def test_materialize_places_signs(self):
        base = Atom(level=2, tau=0.5, n=4)
        sa = SignedAtom(base=base, support=(3, 1), signs=(1, -1))
        np.testing.assert_array_equal(sa.materialize(), [0.0, -0.5, 0.0, 0.5])

    def test_rejects_wrong_support_size(self):
        base = Atom(level=2, tau=0.5, n=4)
        with pytest.raises(ValueError):
            SignedAtom(base=base, support=(0,), signs=(1,))

    def test_rejects_duplicate_support(self):
        base = Atom(level=2, tau=0.5, n=4)
        with pytest.raises(ValueError):
            SignedAtom(base=base, support=(1, 1), signs=(1, -1))

    def test_rejects_bad_sign(self):
        base = Atom(level=1, tau=1.0, n=2)
        with pytest.raises(ValueError):
            SignedAtom(base=base, support=(0,), signs=(2,))


class TestEnumerate:
    @pytest.mark.parametrize("n,count", [(1, 2), (2, 8), (3, 26), (4, 80)])
    def test_counts(self, n, count):
        rows = enumerate_atoms(np.linspace(2.0, 1.0, n))
        assert rows.shape == (count, n)

    def test_rows_distinct(self):
        rows = enumerate_atoms([2.0, 1.0, 0.5])
        assert len({tuple(r) for r in rows}) == rows.shape[0]

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_rows_all_unit_norm(self, n, seed):
        w = random_weights(np.random.default_rng(seed), n)
        rows = enumerate_atoms(w)
        assert rows.shape[0] == 3 ** n - 1
        for r in rows:
            assert owl_norm(r, w) == pytest.approx(1.0, rel=1e-12)

    def test_refuses_large_dimension(self):
        with pytest.raises(ValueError):
            enumerate_atoms(np.linspace(2.0, 1.0, 13))


class TestLinearOracle:
    def test_worked_example_sparse_winner(self):
        got = linear_oracle([3.0, -1.0], OwlBall([1.0, 1.0], 1.0))
        np.testing.assert_allclose(got, [1.0, 0.0], atol=1e-15)

    def test_worked_example_dense_winner(self):
        got = linear_oracle([1.0, 1.0], OwlBall([1.0, 0.0], 2.0))
        np.testing.assert_allclose(got, [2.0, 2.0], atol=1e-15)

    def test_signs_follow_gradient(self):
        got = linear_oracle([-2.0, 5.0], OwlBall([1.0, 1.0], 1.0))
        np.testing.assert_allclose(got, [0.0, 1.0], atol=1e-15)

    def test_zero_gradient_returns_first_atom(self):
        got = linear_oracle([0.0, 0.0], OwlBall([2.0, 1.0], 3.0))
        np.testing.assert_allclose(got, [1.5, 0.0])

    def test_tie_prefers_sparsest_level(self):
        # both levels score identically; level 1 should win
        got = linear_oracle([1.0, 1.0], OwlBall([1.0, 1.0], 1.0))
        assert np.count_nonzero(got) == 1

    def test_result_on_ball_boundary(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            w = random_weights(rng, n)
            eps = float(rng.uniform(0.1, 4.0))
            g = rng.standard_normal(n)
            s = linear_oracle(g, OwlBall(w, eps))
            assert owl_norm(s, w) == pytest.approx(eps, rel=1e-12)

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1),
           st.floats(0.1, 5.0))
    def test_beats_every_enumerated_atom(self, n, seed, eps):
        rng = np.random.default_rng(seed)
        w = random_weights(rng, n)
        g = rng.standard_normal(n)
        s = linear_oracle(g, OwlBall(w, eps))
        best = eps * max(float(r @ g) for r in enumerate_atoms(w))
        assert float(s @ g) == pytest.approx(best, rel=1e-10, abs=1e-10)

    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_value_is_radius_times_dual_norm(self, n, seed):
        rng = np.random.default_rng(seed)
        w = random_weights(rng, n)
        g = rng.standard_normal(n)
        eps = float(rng.uniform(0.1, 3.0))
        s = linear_oracle(g, OwlBall(w, eps))
        assert float(s @ g) == pytest.approx(eps * dual_norm(g, w), rel=1e-11)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            linear_oracle([1.0, 2.0, 3.0], OwlBall([1.0, 1.0], 1.0))
