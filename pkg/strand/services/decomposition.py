"""Frobenius decompositions of diagrams and readback of diagrams as terms."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from strand.models.terms import Gen, Id, Par, Spider, Term, Twist, par_all, seq_all
from strand.services import array_kernel as ak
from strand.services import finite_function as ff
from strand.services.bipartite_multigraph import SignatureMismatch, WellFormednessError, check_well_formed
from strand.services.diagram import (
    Diagram,
    NotWellFormed,
    compose_all,
    dagger,
    half_spider,
    identity_diagram,
    spider,
    tensor,
    tensor_typing_ids,
)
from strand.services.finite_function import FiniteFunction
from strand.services.signature import ShapeMismatch, Signature
from strand.services.validation import require_ma, topological_levels

logger = logging.getLogger(__name__)


# ── Decomposition ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FrobeniusDecomposition:
    """The pieces of ``σ ; (id_W ⊗ (e_s† ; p ; g ; q ; e_t)) ; τ†``.

    ``σ`` copies every wire onto a bus that runs past the operations; ``τ†``
    merges the bus with the wires the operations produced.
    ``p`` lists, for each input of the tensoring, the input edge feeding it;
    ``q`` lists, for each output of the tensoring, the output edge it becomes.
    """

    s: FiniteFunction
    t: FiniteFunction
    ei: FiniteFunction
    eo: FiniteFunction
    p: FiniteFunction
    q: FiniteFunction
    tensoring: Diagram
    wn: FiniteFunction
    typings: np.ndarray

    def spiders(self, sig: Signature) -> list[Diagram]:
        """The seven spiders ``[σ, bus, e_s†, p, q, e_t, τ†]``; the tensoring is omitted."""
        wn = self.wn
        W = wn.source
        both = ff.coproduct(ff.identity(W), ff.identity(W))
        in_labels = ff.compose(self.ei, wn)
        out_labels = ff.compose(self.eo, wn)
        return [
            spider(self.s, both, wn, sig),
            identity_diagram(wn, sig),
            dagger(half_spider(self.ei, wn, sig)),
            spider(ff.identity(self.ei.source), self.p, in_labels, sig),
            spider(self.q, ff.identity(self.eo.source), out_labels, sig),
            half_spider(self.eo, wn, sig),
            spider(both, self.t, wn, sig),
        ]


def assemble(pieces: Sequence[Diagram], tensoring: Diagram) -> Diagram:
    """Compose the spiders of :meth:`FrobeniusDecomposition.spiders` around *tensoring*."""
    sigma, bus, es_dag, p, q, et, tau_dag = pieces
    inner = compose_all([es_dag, p, tensoring, q, et])
    return compose_all([sigma, tensor(bus, inner), tau_dag])


def resolve_typings(d: Diagram, sig: Signature) -> np.ndarray:
    """Per-operation typing index, or NotWellFormed."""
    try:
        return check_well_formed(d.G, sig)
    except (WellFormednessError, SignatureMismatch) as exc:
        raise NotWellFormed(str(exc)) from exc


def decompose(d: Diagram, sig: Signature) -> FrobeniusDecomposition:
    """Split a well-formed diagram into spiders around a tensoring of its operations.

    Raises:
        NotWellFormed: If *d* is not well-formed over *sig*.
    """
    k = resolve_typings(d, sig)
    G = d.G
    P = G.pi.target
    key_in = FiniteFunction(G.X * P, G.xi.table * P + G.pi.table)
    key_out = FiniteFunction(G.X * P, G.xo.table * P + G.po.table)
    p = ff.sort_by_mono_key(key_in)
    q = ff.sort_by_mono_key(key_out)
    tid = sig.typing_ids(G.xn.table, k)
    tensoring = tensor_typing_ids(G.xn.table, tid, sig)
    logger.debug("decompose: X=%d Ei=%d Eo=%d", G.X, G.Ei, G.Eo)
    return FrobeniusDecomposition(
        s=d.s, t=d.t, ei=G.wi, eo=G.wo, p=p, q=q, tensoring=tensoring, wn=G.wn, typings=k,
    )


def recompose(fd: FrobeniusDecomposition, sig: Signature) -> Diagram:
    """Compose the pieces of a decomposition back into one diagram.

    Raises:
        ShapeMismatch: If the permutations do not fit the edge maps and the tensoring.
    """
    g = fd.tensoring
    if fd.p.source != fd.ei.source or fd.q.source != fd.eo.source:
        raise ShapeMismatch("sorting permutations do not match the edge maps")
    if g.s.source != fd.p.source or g.t.source != fd.q.source:
        raise ShapeMismatch("tensoring boundary does not match the sorting permutations")
    return assemble(fd.spiders(sig), g)


# ── Readback ─────────────────────────────────────────────────────────────────

def _spider_leaf(d: Diagram) -> Spider:
    return Spider(tuple(d.s.table.tolist()), tuple(d.t.table.tolist()), tuple(d.G.wn.table.tolist()))


def readback(d: Diagram, sig: Signature, pure: bool = False) -> Term:
    """A term denoting *d*.

    By default the term mirrors the Frobenius decomposition, with spider
    leaves around a tensor of generators. With ``pure=True`` a monogamous
    acyclic diagram is read back as a term built only from identities,
    twists and generators.

    Raises:
        NotWellFormed: If *d* is not well-formed.
        NotMonogamousAcyclic: If ``pure`` is requested for a diagram that is not monogamous acyclic.
    """
    if pure:
        return _readback_pure(d, sig)
    fd = decompose(d, sig)
    xn = d.G.xn.table.tolist()
    gens = [Gen(op, int(k)) for op, k in zip(xn, fd.typings.tolist())]
    sigma, _, es_dag, p, q, et, tau_dag = fd.spiders(sig)
    inner = seq_all([
        _spider_leaf(es_dag),
        _spider_leaf(p),
        par_all(gens),
        _spider_leaf(q),
        _spider_leaf(et),
    ])
    bus = Id(tuple(fd.wn.table.tolist()))
    return seq_all([_spider_leaf(sigma), Par(bus, inner), _spider_leaf(tau_dag)])


def _layer(pieces: list[Term]) -> Term:
    """Par of *pieces*, with the empty identity dropped where possible."""
    kept = [p for p in pieces if not (isinstance(p, Id) and not p.labels)]
    return par_all(kept) if kept else Id(())


def _permute(live: list[int], wanted: list[int], wn: list[int], steps: list[Term]) -> None:
    """Bubble *live* into the order *wanted*, one adjacent twist per swap."""
    pos = {w: i for i, w in enumerate(wanted)}
    keys = [pos[w] for w in live]
    n = len(live)
    for end in range(n - 1, 0, -1):
        swapped = False
        for i in range(end):
            if keys[i] > keys[i + 1]:
                a, b = live[i], live[i + 1]
                steps.append(_layer([
                    Id(tuple(wn[w] for w in live[:i])),
                    Twist((wn[a],), (wn[b],)),
                    Id(tuple(wn[w] for w in live[i + 2:])),
                ]))
                live[i], live[i + 1] = b, a
                keys[i], keys[i + 1] = keys[i + 1], keys[i]
                swapped = True
        if not swapped:
            break


def _readback_pure(d: Diagram, sig: Signature) -> Term:
    require_ma(d)
    k = resolve_typings(d, sig).tolist()
    G = d.G
    W, X = G.W, G.X
    wn = G.wn.table.tolist()
    xn = G.xn.table.tolist()

    bound = G.pi.target
    order_i = np.argsort(G.xi.table * bound + G.pi.table, kind="stable")
    order_o = np.argsort(G.xo.table * bound + G.po.table, kind="stable")
    ptr_i = ak.prefix_sum(np.bincount(G.xi.table, minlength=X)).tolist() + [G.Ei]
    ptr_o = ak.prefix_sum(np.bincount(G.xo.table, minlength=X)).tolist() + [G.Eo]
    ins = G.wi.table[order_i].tolist()
    outs = G.wo.table[order_o].tolist()

    levels = topological_levels(G)
    op_levels = levels[W:]
    steps: list[Term] = []
    live = d.s.table.tolist()
    for lvl in np.unique(op_levels).tolist():
        layer_ops = np.flatnonzero(op_levels == lvl).tolist()
        consumed = [w for x in layer_ops for w in ins[ptr_i[x]:ptr_i[x + 1]]]
        consumed_set = set(consumed)
        rest = [w for w in live if w not in consumed_set]
        _permute(live, rest + consumed, wn, steps)
        steps.append(_layer([Id(tuple(wn[w] for w in rest))] + [Gen(xn[x], k[x]) for x in layer_ops]))
        live = rest + [w for x in layer_ops for w in outs[ptr_o[x]:ptr_o[x + 1]]]
    _permute(live, d.t.table.tolist(), wn, steps)

    if not steps:
        return Id(tuple(wn[w] for w in live))
    logger.debug("pure readback: %d steps for %d operations", len(steps), X)
    return seq_all(steps)
