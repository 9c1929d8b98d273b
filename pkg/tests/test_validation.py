"""Tests for monogamy, acyclicity, canonical forms and isomorphism witnesses."""

import numpy as np
import pytest

from strand.models.terms import Counit, Gen, Id, Join, Par, Seq, Split, Unit, seq_all
from strand.services import finite_function as ff
from strand.services.bipartite_multigraph import BipartiteMultigraph
from strand.services.diagram import Diagram, NotMonogamousAcyclic
from strand.services.finite_function import FiniteFunction
from strand.services.term_builder import to_diagram_slow
from strand.services.validation import (
    canonicalize_ma,
    check_acyclic,
    check_iso_witness,
    check_monogamous,
    require_ma,
    topological_levels,
)
from tests.factories import random_permutation, random_signature, random_term, sig_from


def _make_sig():
    return sig_from("A", {"f": [("A", "A")], "g": [("A A", "A")], "h": [("A", "A")]})


def _make_running_example():
    """Three operations with copies and a discard: ``A A A → A A``; the closing join loops through h."""
    f, g, h = Gen(0), Gen(1), Gen(2)
    a = (0,)
    return Seq(
        Seq(
            Par(Split(0), Par(Id(a), Split(0))),
            Par(Par(f, g), Par(h, Id(a))),
        ),
        Par(Counit(0), Par(Id(a), Join(0))),
    )


def _make_loop():
    """An operation whose output is fed back to its own input."""
    return seq_all([Unit(0), Split(0), Par(Gen(0), Id((0,))), Join(0), Counit(0)])


def _make_self_loop():
    """A monogamous diagram whose single operation consumes its own output."""
    one = FiniteFunction(1, [0])
    G = BipartiteMultigraph(wi=one, wo=one, xi=one, xo=one, pi=FiniteFunction(1, [0]),
                            po=FiniteFunction(1, [0]), wn=FiniteFunction(1, [0]), xn=FiniteFunction(3, [0]))
    return Diagram(ff.initial(1), ff.initial(1), G)


def _relabel(d, pw, pei, peo, px):
    """Move wire ``w`` to ``pw(w)`` and likewise for edges and operations."""
    G = d.G
    H = BipartiteMultigraph(
        wi=ff.compose(ff.compose(pei.inverse(), G.wi), pw),
        wo=ff.compose(ff.compose(peo.inverse(), G.wo), pw),
        xi=ff.compose(ff.compose(pei.inverse(), G.xi), px),
        xo=ff.compose(ff.compose(peo.inverse(), G.xo), px),
        pi=ff.compose(pei.inverse(), G.pi),
        po=ff.compose(peo.inverse(), G.po),
        wn=ff.compose(pw.inverse(), G.wn),
        xn=ff.compose(px.inverse(), G.xn),
    )
    return Diagram(ff.compose(d.s, pw), ff.compose(d.t, pw), H)


def _random_relabeling(rng, d):
    G = d.G
    return tuple(random_permutation(rng, n) for n in (G.W, G.Ei, G.Eo, G.X))


class TestMonogamy:
    """Tests for the one-producer one-consumer check."""

    def test_running_example_is_not_monogamous(self):
        d = to_diagram_slow(_make_running_example(), _make_sig())
        assert d.G.X == 3
        assert d.source_type.table.tolist() == [0, 0, 0]
        assert d.target_type.table.tolist() == [0, 0]
        assert not check_monogamous(d)

    def test_identity_is_monogamous(self):
        assert check_monogamous(to_diagram_slow(Id((0, 0)), _make_sig()))

    def test_split_is_not_monogamous(self):
        assert not check_monogamous(to_diagram_slow(Split(0), _make_sig()))

    def test_frobenius_free_terms_are_monogamous(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            sig = random_signature(rng)
            d = to_diagram_slow(random_term(rng, sig, int(rng.integers(1, 25))), sig)
            assert check_monogamous(d)
            assert check_acyclic(d)


class TestAcyclicity:
    """Tests for topological levels and cycle detection."""

    def test_running_example_is_cyclic(self):
        d = to_diagram_slow(_make_running_example(), _make_sig())
        G = d.G
        h = int(np.flatnonzero(G.xn.table == 2)[0])
        # the final join merges h's output with the copy of its input
        assert G.wi.table[G.xi.table == h].tolist() == G.wo.table[G.xo.table == h].tolist()
        assert topological_levels(G) is None
        assert not check_acyclic(d)

    def test_chain_levels(self):
        d = to_diagram_slow(Seq(Gen(0), Gen(2)), _make_sig())
        assert topological_levels(d.G).tolist() == [0, 2, 4, 1, 3]

    def test_loop_is_cyclic(self):
        d = to_diagram_slow(_make_loop(), _make_sig())
        assert topological_levels(d.G) is None
        assert not check_acyclic(d)

    def test_self_loop_is_monogamous_but_cyclic(self):
        d = _make_self_loop()
        assert check_monogamous(d)
        assert not check_acyclic(d)

    def test_require_ma(self):
        sig = _make_sig()
        require_ma(to_diagram_slow(Seq(Gen(0), Gen(2)), sig))
        with pytest.raises(NotMonogamousAcyclic, match="monogamous"):
            require_ma(to_diagram_slow(_make_running_example(), sig))
        with pytest.raises(NotMonogamousAcyclic, match="cycle"):
            require_ma(_make_self_loop())


class TestCanonicalize:
    """Tests for the canonical renumbering of monogamous acyclic diagrams."""

    def test_invariant_under_renumbering(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            sig = random_signature(rng, polymorphic=True)
            d = to_diagram_slow(random_term(rng, sig, int(rng.integers(1, 30))), sig)
            shuffled = _relabel(d, *_random_relabeling(rng, d))
            assert canonicalize_ma(shuffled) == canonicalize_ma(d)

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        sig = random_signature(rng)
        d = canonicalize_ma(to_diagram_slow(random_term(rng, sig, 20), sig))
        assert canonicalize_ma(d) == d

    def test_keeps_boundary_types(self):
        rng = np.random.default_rng(3)
        sig = random_signature(rng)
        d = to_diagram_slow(random_term(rng, sig, 15), sig)
        c = canonicalize_ma(d)
        assert c.source_type == d.source_type
        assert c.target_type == d.target_type
        assert c.G.shape == d.G.shape

    def test_distinguishes_different_operations(self):
        sig = _make_sig()
        d0 = canonicalize_ma(to_diagram_slow(Gen(0), sig))
        d1 = canonicalize_ma(to_diagram_slow(Gen(2), sig))
        assert d0 != d1

    def test_closed_components(self):
        sig = sig_from("A", {"u": [("", "A")], "c": [("A", "")]})
        closed = Seq(Gen(0), Gen(1))
        d = to_diagram_slow(Par(closed, Par(Id((0,)), closed)), sig)
        rng = np.random.default_rng(4)
        shuffled = _relabel(d, *_random_relabeling(rng, d))
        assert canonicalize_ma(shuffled) == canonicalize_ma(d)

    def test_rejects_non_ma(self):
        with pytest.raises(NotMonogamousAcyclic):
            canonicalize_ma(to_diagram_slow(_make_running_example(), _make_sig()))


class TestIsoWitness:
    """Tests for checking explicit isomorphisms of cospans."""

    def test_relabeling_is_a_witness(self):
        rng = np.random.default_rng(5)
        sig = random_signature(rng)
        d = to_diagram_slow(random_term(rng, sig, 12), sig)
        alphas = _random_relabeling(rng, d)
        assert check_iso_witness(d, _relabel(d, *alphas), *alphas)

    def test_identity_witness(self):
        d = to_diagram_slow(_make_running_example(), _make_sig())
        G = d.G
        assert check_iso_witness(d, d, ff.identity(G.W), ff.identity(G.Ei), ff.identity(G.Eo), ff.identity(G.X))

    def test_non_permutation_rejected(self):
        d = to_diagram_slow(Seq(Gen(0), Gen(2)), _make_sig())
        G = d.G
        collapse = FiniteFunction(G.W, [0] * G.W)
        assert not check_iso_witness(d, d, collapse, ff.identity(G.Ei), ff.identity(G.Eo), ff.identity(G.X))

    def test_swapped_operations_rejected(self):
        d = to_diagram_slow(Seq(Gen(0), Gen(2)), _make_sig())
        G = d.G
        swap = FiniteFunction(2, [1, 0])
        assert not check_iso_witness(d, d, ff.identity(G.W), ff.identity(G.Ei), ff.identity(G.Eo), swap)
