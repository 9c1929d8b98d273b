"""Tests for finite functions and their category structure."""

import numpy as np
import pytest

from strand.services import finite_function as ff
from strand.services.finite_function import (
    FiniteFunction,
    FiniteFunctionError,
    KeyNotMono,
    NotAFiber,
    NotSurjective,
    TargetMismatch,
    TypeMismatch,
)
from tests.factories import random_finite_function, random_surjection, run_counts


def _ff(target, table):
    return FiniteFunction(target, table)


class TestFiniteFunction:
    """Tests for construction and basic predicates."""

    def test_source_is_table_length(self):
        f = _ff(5, [1, 4, 0])
        assert f.source == 3
        assert len(f) == 3

    def test_out_of_range_entry_rejected(self):
        with pytest.raises(FiniteFunctionError):
            _ff(2, [0, 2])

    def test_negative_target_rejected(self):
        with pytest.raises(FiniteFunctionError):
            _ff(-1, [])

    def test_table_is_read_only(self):
        f = _ff(3, [0, 1])
        with pytest.raises(ValueError):
            f.table[0] = 2

    def test_equality_and_hash(self):
        assert _ff(3, [0, 1]) == _ff(3, [0, 1])
        assert _ff(3, [0, 1]) != _ff(4, [0, 1])
        assert hash(_ff(3, [0, 1])) == hash(_ff(3, [0, 1]))

    def test_predicates(self):
        assert _ff(3, [2, 0, 1]).is_permutation()
        assert not _ff(3, [2, 2]).is_injective()
        assert _ff(2, [1, 0, 1]).is_surjective()
        assert not _ff(3, [0, 0]).is_surjective()

    def test_inverse(self):
        p = _ff(3, [2, 0, 1])
        assert ff.compose(p, p.inverse()) == ff.identity(3)

    def test_inverse_of_non_permutation(self):
        with pytest.raises(FiniteFunctionError):
            _ff(3, [0, 0, 1]).inverse()


class TestCategory:
    """Tests for identity, composition, initial and terminal maps."""

    def test_identity(self):
        assert ff.identity(0) == _ff(0, [])
        assert ff.identity(3) == _ff(3, [0, 1, 2])

    def test_compose(self):
        assert ff.compose(_ff(3, [2, 0]), _ff(6, [5, 1, 1])) == _ff(6, [1, 5])

    def test_compose_operator(self):
        assert (_ff(3, [2, 0]) >> _ff(6, [5, 1, 1])) == _ff(6, [1, 5])

    def test_compose_type_mismatch(self):
        with pytest.raises(TypeMismatch):
            ff.compose(_ff(3, [0]), _ff(2, [0, 1]))

    def test_initial_and_terminal(self):
        assert ff.initial(5) == _ff(5, [])
        assert ff.terminal(0) == _ff(1, [])
        assert ff.terminal(3) == _ff(1, [0, 0, 0])

    @pytest.mark.parametrize("runs", run_counts(300, 10_000))
    def test_laws_on_random_functions(self, runs):
        rng = np.random.default_rng(0)
        for _ in range(runs):
            a, b, c, d = (int(n) for n in rng.integers(1, 20, size=4))
            f = random_finite_function(rng, a, b)
            g = random_finite_function(rng, b, c)
            h = random_finite_function(rng, c, d)
            assert ff.compose(ff.compose(f, g), h) == ff.compose(f, ff.compose(g, h))
            assert ff.compose(ff.identity(a), f) == f
            assert ff.compose(f, ff.identity(b)) == f
            assert ff.compose(f, ff.terminal(b)) == ff.terminal(a)


class TestCoproducts:
    """Tests for injections and copairing."""

    def test_injections(self):
        assert ff.inj0(2, 3) == _ff(5, [0, 1])
        assert ff.inj1(2, 3) == _ff(5, [2, 3, 4])
        assert ff.inj0(0, 4) == _ff(4, [])

    def test_coproduct(self):
        assert ff.coproduct(_ff(2, [1]), _ff(2, [0, 0])) == _ff(2, [1, 0, 0])
        assert (_ff(2, [1]) + _ff(2, [0, 0])) == _ff(2, [1, 0, 0])

    def test_coproduct_target_mismatch(self):
        with pytest.raises(TargetMismatch):
            ff.coproduct(_ff(2, [1]), _ff(3, [0]))

    def test_coproduct_all_target_mismatch(self):
        with pytest.raises(TargetMismatch):
            ff.coproduct_all([_ff(2, [1]), _ff(3, [0])], 2)

    @pytest.mark.parametrize("runs", run_counts(300, 10_000))
    def test_universal_property(self, runs):
        rng = np.random.default_rng(1)
        for _ in range(runs):
            a, b, c = (int(n) for n in rng.integers(0, 15, size=3))
            c += 1
            f = random_finite_function(rng, a, c)
            g = random_finite_function(rng, b, c)
            h = ff.coproduct(f, g)
            assert ff.compose(ff.inj0(a, b), h) == f
            assert ff.compose(ff.inj1(a, b), h) == g

    def test_coproduct_all_matches_binary_fold(self):
        rng = np.random.default_rng(2)
        fs = [random_finite_function(rng, int(rng.integers(0, 6)), 4) for _ in range(5)]
        folded = fs[0]
        for f in fs[1:]:
            folded = ff.coproduct(folded, f)
        assert ff.coproduct_all(fs, 4) == folded


class TestTensor:
    """Tests for the monoidal product and symmetry."""

    def test_tensor(self):
        assert ff.tensor(_ff(2, [1]), _ff(1, [0, 0])) == _ff(3, [1, 2, 2])
        assert (_ff(2, [1]) @ _ff(1, [0, 0])) == _ff(3, [1, 2, 2])

    @pytest.mark.parametrize("runs", run_counts(200, 10_000))
    def test_tensor_is_coproduct_of_shifted_maps(self, runs):
        rng = np.random.default_rng(3)
        for _ in range(runs):
            a0, b0, a1, b1 = (int(n) for n in rng.integers(1, 12, size=4))
            f = random_finite_function(rng, a0, b0)
            g = random_finite_function(rng, a1, b1)
            expected = ff.coproduct(ff.compose(f, ff.inj0(b0, b1)), ff.compose(g, ff.inj1(b0, b1)))
            assert ff.tensor(f, g) == expected

    def test_tensor_all_matches_binary_fold(self):
        rng = np.random.default_rng(4)
        fs = [random_finite_function(rng, int(rng.integers(0, 6)), int(rng.integers(1, 6))) for _ in range(6)]
        folded = fs[0]
        for f in fs[1:]:
            folded = ff.tensor(folded, f)
        assert ff.tensor_all(fs) == folded
        assert ff.tensor_all([]) == ff.identity(0)

    def test_twist(self):
        assert ff.twist(1, 1) == _ff(2, [1, 0])
        assert ff.twist(3, 0) == ff.identity(3)

    @pytest.mark.parametrize("runs", run_counts(200, 10_000))
    def test_twist_inverse_and_naturality(self, runs):
        rng = np.random.default_rng(5)
        for _ in range(runs):
            a0, b0, a1, b1 = (int(n) for n in rng.integers(0, 8, size=4))
            assert ff.compose(ff.twist(a0, a1), ff.twist(a1, a0)) == ff.identity(a0 + a1)
            if b0 == 0 and a0 or b1 == 0 and a1:
                continue
            f = random_finite_function(rng, a0, b0)
            g = random_finite_function(rng, a1, b1)
            lhs = ff.compose(ff.tensor(f, g), ff.twist(b0, b1))
            rhs = ff.compose(ff.twist(a0, a1), ff.tensor(g, f))
            assert lhs == rhs


class TestCoequalizers:
    """Tests for coequalizers and their universal maps."""

    def test_coequalizer_of_equal_pair_is_identity(self):
        f = _ff(4, [0, 2, 3])
        assert ff.coequalizer(f, f) == ff.identity(4)

    def test_coequalizer_path(self):
        assert ff.coequalizer(_ff(3, [0, 1]), _ff(3, [1, 2])) == _ff(1, [0, 0, 0])

    def test_coequalizer_empty_pair(self):
        assert ff.coequalizer(_ff(3, []), _ff(3, [])) == ff.identity(3)

    def test_coequalizer_needs_parallel_pair(self):
        with pytest.raises(TypeMismatch):
            ff.coequalizer(_ff(3, [0]), _ff(4, [0]))

    def test_universal_examples(self):
        assert ff.universal(ff.identity(2), _ff(7, [4, 1])) == _ff(7, [4, 1])
        assert ff.universal(_ff(1, [0, 0]), _ff(5, [3, 3])) == _ff(5, [3])
        assert ff.universal(_ff(2, [0, 1, 0]), _ff(4, [2, 0, 2])) == _ff(4, [2, 0])

    def test_universal_not_a_fiber(self):
        with pytest.raises(NotAFiber):
            ff.universal(_ff(1, [0, 0]), _ff(5, [3, 4]))

    def test_universal_not_surjective(self):
        with pytest.raises(NotSurjective):
            ff.universal(_ff(3, [0, 1]), _ff(5, [3, 4]))

    def test_universal_type_mismatch(self):
        with pytest.raises(TypeMismatch):
            ff.universal(_ff(1, [0]), _ff(5, [3, 4]))

    def test_random_coforks_factor_through_coequalizer(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            a = int(rng.integers(0, 20))
            b = int(rng.integers(1, 30))
            f = random_finite_function(rng, a, b)
            g = random_finite_function(rng, a, b)
            q = ff.coequalizer(f, g)
            assert ff.compose(f, q) == ff.compose(g, q)
            assert q.is_surjective()

            # any map constant on the classes of q factors through it
            c = int(rng.integers(1, 10))
            h = ff.compose(q, random_finite_function(rng, q.target, c))
            u = ff.universal(q, h)
            assert ff.compose(q, u) == h

    def test_random_surjection_roundtrip(self):
        rng = np.random.default_rng(7)
        q = random_surjection(rng, 20, 6)
        u = random_finite_function(rng, 6, 4)
        assert ff.universal(q, ff.compose(q, u)) == u


class TestSorting:
    """Tests for sorting permutations."""

    def test_sort_by_mono_key(self):
        assert ff.sort_by_mono_key(_ff(3, [2, 0, 1])) == _ff(3, [1, 2, 0])

    def test_sorted_mono_key_gives_identity(self):
        assert ff.sort_by_mono_key(_ff(5, [0, 2, 4])) == ff.identity(3)

    def test_stable_sort(self):
        assert ff.stable_sort_by_key(_ff(2, [1, 0, 1])) == _ff(3, [1, 0, 2])

    def test_mono_key_rejects_duplicates(self):
        with pytest.raises(KeyNotMono):
            ff.sort_by_mono_key(_ff(2, [1, 0, 1]))

    def test_sorted_key_is_nondecreasing(self):
        rng = np.random.default_rng(8)
        key = random_finite_function(rng, 40, 6)
        p = ff.stable_sort_by_key(key)
        assert np.all(np.diff(ff.compose(p, key).table) >= 0)


class TestInjections:
    """Tests for segmented injections."""

    def test_example(self):
        s = _ff(4, [1, 2, 3])
        x = _ff(3, [2, 0])
        assert ff.injections(s, x) == _ff(6, [3, 4, 5, 0])

    def test_empty_selector(self):
        s = _ff(4, [1, 2, 3])
        assert ff.injections(s, _ff(3, [])) == _ff(6, [])

    def test_matches_concatenated_injections(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            k = int(rng.integers(1, 8))
            sizes = rng.integers(0, 5, size=k)
            s = _ff(6, sizes)
            x = random_finite_function(rng, int(rng.integers(0, 10)), k)
            offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
            expected = [int(offsets[i]) + j for i in x.table for j in range(sizes[i])]
            assert ff.injections(s, x).table.tolist() == expected

    def test_selector_target_mismatch(self):
        with pytest.raises(TypeMismatch):
            ff.injections(_ff(4, [1, 2]), _ff(3, [0]))
