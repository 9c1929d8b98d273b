"""Tests for diagram primitives, tensor, composition and spiders."""

import numpy as np
import pytest

from strand.services import diagram as dg
from strand.services import finite_function as ff
from strand.services.bipartite_multigraph import check_well_formed
from strand.services.diagram import BoundaryMismatch, DiagramError, TypingMismatch
from strand.services.finite_function import FiniteFunction
from strand.services.validation import check_iso_witness
from tests.factories import run_counts, sig_from


def _make_sig():
    return sig_from("A B C", {"f": [("A", "B C")], "g": [("B", "A")], "h": [("C", "C")]})


def _gen(sig, name):
    op = sig.op_index(name)
    ((a, b),) = sig.typings[op]
    return dg.singleton(sig.labeling(a), sig.labeling(b), op, sig)


class TestPrimitives:
    """Tests for identities, twists, spiders and Frobenius generators."""

    def test_identity(self):
        sig = _make_sig()
        d = dg.identity_diagram(sig.labeling([0]), sig)
        assert d.s == ff.identity(1) and d.t == ff.identity(1)
        assert d.G.shape == (1, 0, 0, 0)

    def test_empty_identity(self):
        sig = _make_sig()
        d = dg.identity_diagram(ff.initial(3), sig)
        assert d.G.W == 0 and d.s.source == 0

    def test_twist(self):
        sig = _make_sig()
        d = dg.twist_diagram(sig.labeling([0]), sig.labeling([1]), sig)
        assert d.t == FiniteFunction(2, [1, 0])
        assert d.source_type.table.tolist() == [0, 1]
        assert d.target_type.table.tolist() == [1, 0]

    def test_twist_with_unequal_halves(self):
        sig = _make_sig()
        d = dg.twist_diagram(sig.labeling([0]), sig.labeling([1, 2]), sig)
        assert d.t == FiniteFunction(3, [1, 2, 0])
        assert d.source_type.table.tolist() == [0, 1, 2]
        assert d.target_type.table.tolist() == [1, 2, 0]

    def test_twist_with_empty_side_is_identity(self):
        sig = _make_sig()
        d = dg.twist_diagram(sig.labeling([0, 2]), sig.labeling([]), sig)
        assert d.s == d.t == ff.identity(2)

    def test_frobenius_generators(self):
        sig = _make_sig()
        split = dg.frobenius_generator("split", 1, sig)
        assert (split.s.source, split.t.source, split.G.W) == (1, 2, 1)
        assert dg.dagger(split) == dg.frobenius_generator("join", 1, sig)
        unit = dg.frobenius_generator("unit", 0, sig)
        assert (unit.s.source, unit.t.source) == (0, 1)
        counit = dg.frobenius_generator("counit", 0, sig)
        assert (counit.s.source, counit.t.source) == (1, 0)

    def test_unknown_frobenius_generator(self):
        with pytest.raises(DiagramError):
            dg.frobenius_generator("cup", 0, _make_sig())

    def test_dagger_is_involution(self):
        d = _gen(_make_sig(), "f")
        assert dg.dagger(dg.dagger(d)) == d

    def test_half_spider(self):
        sig = _make_sig()
        d = dg.half_spider(FiniteFunction(2, [1, 1, 0]), sig.labeling([0, 2]), sig)
        assert d.source_type.table.tolist() == [2, 2, 0]
        assert d.t == ff.identity(2)


class TestSingleton:
    """Tests for single-operation diagrams."""

    def test_layout(self):
        d = _gen(_make_sig(), "f")
        assert d.s == FiniteFunction(3, [0])
        assert d.t == FiniteFunction(3, [1, 2])
        assert d.G.wn.table.tolist() == [0, 1, 2]
        assert d.G.pi.table.tolist() == [0]
        assert d.G.po.table.tolist() == [0, 1]

    def test_wrong_typing(self):
        sig = _make_sig()
        with pytest.raises(TypingMismatch):
            dg.singleton(sig.labeling([1]), sig.labeling([1]), 0, sig)

    def test_singleton_is_well_formed(self):
        sig = _make_sig()
        for name in sig.op_names:
            check_well_formed(_gen(sig, name).G, sig)


class TestTensor:
    """Tests for parallel composition."""

    def test_counts_add(self):
        sig = _make_sig()
        d = dg.tensor(_gen(sig, "g"), _gen(sig, "f"))
        assert (d.G.W, d.G.X) == (5, 2)
        assert d.source_type.table.tolist() == [1, 0]
        assert d.target_type.table.tolist() == [0, 1, 2]

    def test_tensor_all_matches_fold(self):
        sig = _make_sig()
        ds = [_gen(sig, "f"), _gen(sig, "g"), dg.identity_diagram(sig.labeling([2]), sig)]
        assert dg.tensor_all(ds, sig) == dg.tensor(dg.tensor(ds[0], ds[1]), ds[2])

    def test_tensor_all_empty(self):
        sig = _make_sig()
        assert dg.tensor_all([], sig).G.W == 0

    def test_tensor_operations_layout(self):
        sig = _make_sig()
        d = dg.tensor_operations([(0, 0), (1, 0)], sig)
        assert d.G.wn.table.tolist() == [0, 1, 1, 2, 0]
        assert d.s == FiniteFunction(5, [0, 1])
        assert d.t == FiniteFunction(5, [2, 3, 4])
        assert d.G.xi.table.tolist() == [0, 1]
        assert d.G.xo.table.tolist() == [0, 0, 1]
        assert d.G.po.table.tolist() == [0, 1, 0]
        check_well_formed(d.G, sig)

    def test_tensor_operations_bad_typing(self):
        with pytest.raises(TypingMismatch):
            dg.tensor_operations([(0, 1)], _make_sig())

    @pytest.mark.parametrize("runs", run_counts(50, 200))
    def test_tensor_operations_witness(self, runs):
        sig = _make_sig()
        rng = np.random.default_rng(0)
        for _ in range(runs):
            ops = [(int(o), 0) for o in rng.integers(0, sig.n_ops, size=int(rng.integers(1, 12)))]
            fast = dg.tensor_operations(ops, sig)
            folded = _gen(sig, sig.op_names[ops[0][0]])
            for op, _ in ops[1:]:
                folded = dg.tensor(folded, _gen(sig, sig.op_names[op]))
            assert check_iso_witness(fast, folded, *dg.n_fold_tensor_witness(ops, sig))

    def test_wrong_witness_rejected(self):
        sig = _make_sig()
        ops = [(0, 0), (2, 0)]
        fast = dg.tensor_operations(ops, sig)
        folded = dg.tensor(_gen(sig, "f"), _gen(sig, "h"))
        alpha_w, alpha_ei, alpha_eo, alpha_x = dg.n_fold_tensor_witness(ops, sig)
        assert not check_iso_witness(fast, folded, ff.identity(fast.G.W), alpha_ei, alpha_eo, alpha_x)


class TestCompose:
    """Tests for sequential composition."""

    def test_glues_boundary(self):
        sig = _make_sig()
        f = _gen(sig, "f")
        g = dg.tensor(_gen(sig, "g"), _gen(sig, "h"))
        d = dg.compose(f, g)
        assert (d.G.W, d.G.X) == (5, 3)
        assert d.source_type.table.tolist() == [0]
        assert d.target_type.table.tolist() == [0, 2]
        check_well_formed(d.G, sig)

    def test_identity_is_neutral_up_to_renumbering(self):
        sig = _make_sig()
        f = _gen(sig, "f")
        left = dg.compose(dg.identity_diagram(sig.labeling([0]), sig), f)
        right = dg.compose(f, dg.identity_diagram(sig.labeling([1, 2]), sig))
        assert left == f
        assert right == f

    def test_boundary_mismatch(self):
        sig = _make_sig()
        with pytest.raises(BoundaryMismatch):
            dg.compose(_gen(sig, "f"), _gen(sig, "f"))

    def test_boundary_mismatch_is_type_mismatch(self):
        sig = _make_sig()
        with pytest.raises(ff.TypeMismatch):
            dg.compose(_gen(sig, "g"), _gen(sig, "g"))

    def test_compose_all(self):
        sig = _make_sig()
        h = _gen(sig, "h")
        d = dg.compose_all([h, h, h])
        assert (d.G.W, d.G.X) == (4, 3)

    def test_compose_all_of_nothing(self):
        with pytest.raises(DiagramError, match="no diagrams"):
            dg.compose_all([])


class TestSpiders:
    """Tests for spider normal forms and the special Frobenius laws."""

    def test_split_then_join_is_identity(self):
        sig = _make_sig()
        d = dg.compose(dg.frobenius_generator("split", 0, sig), dg.frobenius_generator("join", 0, sig))
        assert dg.spiders_equal(d, dg.identity_diagram(sig.labeling([0]), sig))

    def test_unit_then_counit_is_isolated_wire(self):
        sig = _make_sig()
        d = dg.compose(dg.frobenius_generator("unit", 2, sig), dg.frobenius_generator("counit", 2, sig))
        s, t, wn = dg.spider_normal_form(d)
        assert (s.source, t.source, wn.table.tolist()) == (0, 0, [2])

    def test_frobenius_law(self):
        sig = _make_sig()
        split = dg.frobenius_generator("split", 0, sig)
        join = dg.frobenius_generator("join", 0, sig)
        ident = dg.identity_diagram(sig.labeling([0]), sig)
        lhs = dg.compose(dg.tensor(split, ident), dg.tensor(ident, join))
        rhs = dg.compose(join, split)
        assert dg.spiders_equal(lhs, rhs)

    def test_different_spiders(self):
        sig = _make_sig()
        split = dg.frobenius_generator("split", 0, sig)
        ident = dg.identity_diagram(sig.labeling([0]), sig)
        assert not dg.spiders_equal(split, dg.tensor(ident, ident))

    def test_normal_form_needs_a_spider(self):
        with pytest.raises(DiagramError):
            dg.spider_normal_form(_gen(_make_sig(), "f"))
