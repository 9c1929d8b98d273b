"""Elaborating terms into diagrams: the reference fold and the one-shot wiring construction."""

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from strand.errors import StrandError
from strand.models.terms import (
    Counit,
    Gen,
    Id,
    Join,
    Leaf,
    Spider,
    Split,
    Term,
    Twist,
    Unit,
    is_node,
    preorder,
)
from strand.services import array_kernel as ak
from strand.services import bipartite_multigraph as bm
from strand.services import diagram as dg
from strand.services import finite_function as ff
from strand.services.diagram import Diagram
from strand.services.finite_function import FiniteFunction
from strand.services.signature import Signature
from strand.services.tree_arrays import TreeArrays, ancestor_maps_jump, tree_arrays

logger = logging.getLogger(__name__)


class TermTypeError(StrandError):
    """Raised when a term does not type-check; ``path`` locates the offending subterm."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message} at {path or '<root>'}")
        self.reason = message
        self.path = path


# ── Leaves ───────────────────────────────────────────────────────────────────

def _check_label(label: int, sig: Signature, path: str) -> None:
    if not 0 <= label < sig.n_objects:
        raise TermTypeError(f"unknown object {label}", path)


def leaf_type(leaf: Leaf, sig: Signature, path: str = "") -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Source and target labels of a leaf."""
    match leaf:
        case Id(labels):
            for o in labels:
                _check_label(o, sig, path)
            return labels, labels
        case Twist(left, right):
            for o in (*left, *right):
                _check_label(o, sig, path)
            return left + right, right + left
        case Gen(op, k):
            if _gen_invalid(leaf, sig):
                raise TermTypeError(f"operation {op} has no typing @{k}", path)
            return sig.typings[op][k]
        case Split(o) | Join(o) | Unit(o) | Counit(o):
            _check_label(o, sig, path)
            n_in, n_out = {Split: (1, 2), Join: (2, 1), Unit: (0, 1), Counit: (1, 0)}[type(leaf)]
            return (o,) * n_in, (o,) * n_out
        case Spider(s, t, labels):
            for o in labels:
                _check_label(o, sig, path)
            if any(not 0 <= w < len(labels) for w in (*s, *t)):
                raise TermTypeError("spider leg outside its wires", path)
            return tuple(labels[w] for w in s), tuple(labels[w] for w in t)
    raise TermTypeError(f"not a term: {leaf!r}", path)


def leaf_diagram(leaf: Leaf, sig: Signature, path: str = "") -> Diagram:
    """The primitive diagram denoted by a leaf."""
    leaf_type(leaf, sig, path)
    match leaf:
        case Id(labels):
            return dg.identity_diagram(sig.labeling(labels), sig)
        case Twist(left, right):
            return dg.twist_diagram(sig.labeling(left), sig.labeling(right), sig)
        case Gen(op, k):
            a, b = sig.typings[op][k]
            return dg.singleton(sig.labeling(a), sig.labeling(b), op, sig)
        case Split(o):
            return dg.frobenius_generator("split", o, sig)
        case Join(o):
            return dg.frobenius_generator("join", o, sig)
        case Unit(o):
            return dg.frobenius_generator("unit", o, sig)
        case Counit(o):
            return dg.frobenius_generator("counit", o, sig)
        case Spider(s, t, labels):
            n = len(labels)
            return dg.spider(FiniteFunction(n, s), FiniteFunction(n, t), sig.labeling(labels), sig)
    raise TermTypeError(f"not a term: {leaf!r}", path)


def _leaf_at(tree: TreeArrays, sig: Signature, k: int, node: int, build):
    try:
        return build(tree.leaves[k], sig)
    except TermTypeError as exc:
        raise TermTypeError(exc.reason, tree.path(node)) from exc


def infer_type(term: Term, sig: Signature) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Source and target labels of a term.

    Raises:
        TermTypeError: If a leaf is ill-typed or some ``Seq`` joins mismatched types.
    """
    tree = tree_arrays(term)
    n = tree.n_nodes
    types: list = [None] * n
    for k, node in enumerate(tree.leaf_nodes.table.tolist()):
        types[node] = _leaf_at(tree, sig, k, node, leaf_type)
    right = tree.right_child.table
    for i in range(n - 1, -1, -1):
        if types[i] is not None:
            continue
        (a0, b0), (a1, b1) = types[i + 1], types[int(right[i])]
        if tree.is_compose.table[i]:
            if b0 != a1:
                raise TermTypeError(f"cannot compose {list(b0)} with {list(a1)}", tree.path(i))
            types[i] = (a0, b1)
        else:
            types[i] = (a0 + a1, b0 + b1)
    return types[0]


# ── Reference elaboration ────────────────────────────────────────────────────

def to_diagram_slow(term: Term, sig: Signature) -> Diagram:
    """Elaborate by folding ``compose`` and ``tensor`` over the tree, bottom up.

    Raises:
        TermTypeError: With the path of the first ill-typed ``Seq``.
    """
    tree = tree_arrays(term)
    n = tree.n_nodes
    out: list[Diagram | None] = [None] * n
    leaf_index = {node: k for k, node in enumerate(tree.leaf_nodes.table.tolist())}
    right = tree.right_child.table
    for i in range(n - 1, -1, -1):
        if i in leaf_index:
            out[i] = _leaf_at(tree, sig, leaf_index[i], i, leaf_diagram)
            continue
        d0, d1 = out[i + 1], out[int(right[i])]
        if tree.is_compose.table[i]:
            if d0.target_type != d1.source_type:
                raise TermTypeError(
                    f"cannot compose {d0.target_type.table.tolist()} with {d1.source_type.table.tolist()}",
                    tree.path(i),
                )
            out[i] = dg.compose(d0, d1)
        else:
            out[i] = dg.tensor(d0, d1)
        out[i + 1] = out[int(right[i])] = None
    return out[0]


# ── Wiring maps ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WiringMaps:
    """Boundary maps ``es``, ``et`` and paired internal maps ``es_prime``, ``et_prime`` into the wires."""

    es: FiniteFunction
    et: FiniteFunction
    es_prime: FiniteFunction
    et_prime: FiniteFunction


def wiring_maps_recursive(tree: TreeArrays, leaf_diagrams: Sequence[Diagram]) -> WiringMaps:
    """Wiring maps by structural recursion (evaluated bottom up over the preorder).

    Raises:
        TermTypeError: If a ``Seq`` joins boundaries of different sizes.
    """
    n = tree.n_nodes
    W = [0] * n
    maps: list[WiringMaps | None] = [None] * n
    leaf_index = {int(node): k for k, node in enumerate(tree.leaf_nodes.table)}
    right = tree.right_child.table
    for i in range(n - 1, -1, -1):
        if i in leaf_index:
            d = leaf_diagrams[leaf_index[i]]
            W[i] = d.G.W
            maps[i] = WiringMaps(d.s, d.t, ff.initial(d.G.W), ff.initial(d.G.W))
            continue
        j, r = i + 1, int(right[i])
        lm, rm = maps[j], maps[r]
        W0, W1 = W[j], W[r]
        W[i] = W0 + W1
        if tree.is_compose.table[i]:
            if rm.es.source != lm.et.source:
                raise TermTypeError(f"cannot compose {lm.et.source} wires with {rm.es.source}", tree.path(i))
            i0, i1 = ff.inj0(W0, W1), ff.inj1(W0, W1)
            maps[i] = WiringMaps(
                es=ff.compose(lm.es, i0),
                et=ff.compose(rm.et, i1),
                es_prime=ff.coproduct_all(
                    [ff.compose(lm.es_prime, i0), ff.compose(rm.es, i1), ff.compose(rm.es_prime, i1)], W0 + W1
                ),
                et_prime=ff.coproduct_all(
                    [ff.compose(lm.et_prime, i0), ff.compose(lm.et, i0), ff.compose(rm.et_prime, i1)], W0 + W1
                ),
            )
        else:
            maps[i] = WiringMaps(
                es=ff.tensor(lm.es, rm.es),
                et=ff.tensor(lm.et, rm.et),
                es_prime=ff.tensor(lm.es_prime, rm.es_prime),
                et_prime=ff.tensor(lm.et_prime, rm.et_prime),
            )
        maps[j] = maps[r] = None
    return maps[0]


def _check_seq_arities(tree: TreeArrays, aL: FiniteFunction, aR: FiniteFunction,
                       n_src: np.ndarray, n_tgt: np.ndarray) -> None:
    """Every ``Seq`` node must receive as many bound sources as bound targets."""
    m = tree.n_leaves
    if m < 2:
        return
    bound_src = np.bincount(aL.table, weights=n_src, minlength=m)[1:]
    bound_tgt = np.bincount(aR.table, weights=n_tgt, minlength=m)[:m - 1]
    bad = np.flatnonzero((bound_src != bound_tgt) & (_seq_mask_by_inorder(tree)))
    if len(bad):
        k = int(bad[0])
        node = int(np.flatnonzero((tree.internal_inorder.table == k) & (tree.is_compose.table == 1))[0])
        raise TermTypeError(
            f"cannot compose {int(bound_tgt[k])} wires with {int(bound_src[k])}", tree.path(node)
        )


def _seq_mask_by_inorder(tree: TreeArrays) -> np.ndarray:
    m = tree.n_leaves
    mask = np.zeros(max(m - 1, 0), dtype=bool)
    seqs = np.flatnonzero(tree.is_compose.table)
    mask[tree.internal_inorder.table[seqs]] = True
    return mask


def wiring_maps_sorted(tree: TreeArrays, leaf_diagrams: Sequence[Diagram]) -> WiringMaps:
    """Wiring maps from stable sorts of leaf blocks by their ancestor maps.

    Equal to :func:`wiring_maps_recursive` on the same leaves.
    """
    return sorted_wiring_maps(
        tree,
        ff.tensor_all([d.s for d in leaf_diagrams]),
        ff.tensor_all([d.t for d in leaf_diagrams]),
        ak.as_array([d.s.source for d in leaf_diagrams]),
        ak.as_array([d.t.source for d in leaf_diagrams]),
    )


def sorted_wiring_maps(
    tree: TreeArrays,
    sources: FiniteFunction,
    targets: FiniteFunction,
    n_src: np.ndarray,
    n_tgt: np.ndarray,
) -> WiringMaps:
    """Sort-based wiring maps over an already tensored apex, from leaf legs and leaf arities.

    Args:
        tree: The term tree.
        sources: All leaf source legs in leaf order, into the combined wires.
        targets: All leaf target legs in leaf order.
        n_src: Number of sources of each leaf.
        n_tgt: Number of targets of each leaf.

    Raises:
        TermTypeError: If a ``Seq`` joins boundaries of different sizes.
    """
    m = tree.n_leaves
    aL, aR = ancestor_maps_jump(tree)
    _check_seq_arities(tree, aL, aR, n_src, n_tgt)

    src_sizes = FiniteFunction(ak.max_or(n_src, 0) + 1, n_src)
    tgt_sizes = FiniteFunction(ak.max_or(n_tgt, 0) + 1, n_tgt)
    order_s = ff.stable_sort_by_key(aL)
    order_t = ff.stable_sort_by_key(aR)
    es_all = ff.compose(ff.injections(src_sizes, order_s), sources)
    et_all = ff.compose(ff.injections(tgt_sizes, order_t), targets)

    n_free_src = ak.sum_(n_src[aL.table == 0])
    n_free_tgt = ak.sum_(n_tgt[aR.table == m - 1])
    W = sources.target
    head = et_all.source - n_free_tgt
    return WiringMaps(
        es=FiniteFunction(W, es_all.table[:n_free_src]),
        et=FiniteFunction(W, et_all.table[head:]),
        es_prime=FiniteFunction(W, es_all.table[n_free_src:]),
        et_prime=FiniteFunction(W, et_all.table[:head]),
    )


# ── One-shot elaboration ─────────────────────────────────────────────────────

def wire_up(tree: TreeArrays, leaf_diagrams: Sequence[Diagram], sig: Signature) -> Diagram:
    """Glue existing diagrams along a term tree with a single coequalizer.

    Raises:
        TermTypeError: If a ``Seq`` joins boundaries of different sizes.
        LabelClash: If a ``Seq`` joins boundaries with different labels.
    """
    G = bm.coproduct_all([d.G for d in leaf_diagrams], sig)
    sources = ff.tensor_all([d.s for d in leaf_diagrams])
    targets = ff.tensor_all([d.t for d in leaf_diagrams])
    n_src = ak.as_array([d.s.source for d in leaf_diagrams])
    n_tgt = ak.as_array([d.t.source for d in leaf_diagrams])
    return _glue(tree, G, sources, targets, n_src, n_tgt)


def _glue(
    tree: TreeArrays,
    G: bm.BipartiteMultigraph,
    sources: FiniteFunction,
    targets: FiniteFunction,
    n_src: np.ndarray,
    n_tgt: np.ndarray,
) -> Diagram:
    wm = sorted_wiring_maps(tree, sources, targets, n_src, n_tgt)
    q = ff.coequalizer(wm.et_prime, wm.es_prime)
    H = bm.coequalize_wires(G, q)
    logger.debug("wire_up: %d leaves, %d wires → %d", tree.n_leaves, G.W, q.target)
    return Diagram(ff.compose(wm.es, q), ff.compose(wm.et, q), H)


def to_diagram_fast(term: Term, sig: Signature) -> Diagram:
    """Elaborate a term with one tensor, one sort per boundary side and one coequalizer.

    When every leaf is a generator the tensor is built in closed form;
    otherwise the leaf diagrams are tensored generically.

    Raises:
        TermTypeError: For ill-typed leaves or ``Seq`` nodes joining different sizes.
        LabelClash: For ``Seq`` nodes joining different labels.
    """
    tree = tree_arrays(term)
    leaves = tree.leaves
    if all(isinstance(leaf, Gen) for leaf in leaves):
        ops = ak.as_array([leaf.op for leaf in leaves])
        ks = ak.as_array([leaf.typing for leaf in leaves])
        try:
            tid = sig.typing_ids(ops, ks)
        except StrandError as exc:
            bad = next(i for i, leaf in enumerate(leaves) if _gen_invalid(leaf, sig))
            raise TermTypeError(str(exc), tree.path(int(tree.leaf_nodes.table[bad]))) from exc
        g = dg.tensor_typing_ids(ops, tid, sig)
        ar, coar = sig.arity[tid], sig.coarity[tid]
        Ki, Ko = ak.sum_(ar), ak.sum_(coar)
        W = Ki + Ko
        sources = FiniteFunction(W, ak.arange(Ki))
        targets = FiniteFunction(W, Ki + ak.arange(Ko))
        return _glue(tree, g.G, sources, targets, ar, coar)

    diagrams = [
        _leaf_at(tree, sig, k, node, leaf_diagram)
        for k, node in enumerate(tree.leaf_nodes.table.tolist())
    ]
    return wire_up(tree, diagrams, sig)


def _gen_invalid(leaf: Gen, sig: Signature) -> bool:
    return not (0 <= leaf.op < sig.n_ops and 0 <= leaf.typing < len(sig.typings[leaf.op]))


# ── Substitution ─────────────────────────────────────────────────────────────

def substitute(term: Term, object_map: Mapping[int, Sequence[int]], arrow_terms: Mapping[int, Term]) -> Term:
    """Apply a functor given on generators to a term.

    Objects are replaced by their images (concatenated), generators by
    *arrow_terms*, and Frobenius leaves by spiders on the image wires.
    """
    def objs(labels: Sequence[int]) -> tuple[int, ...]:
        return tuple(o2 for o in labels for o2 in object_map[o])

    def spider_image(s: Sequence[int], t: Sequence[int], labels: Sequence[int]) -> Spider:
        sizes = ak.as_array([len(object_map[o]) for o in labels])
        size_fn = FiniteFunction(ak.max_or(sizes, 0) + 1, sizes)
        n = len(labels)
        s2 = ff.injections(size_fn, FiniteFunction(n, s)).table if n else ak.arange(0)
        t2 = ff.injections(size_fn, FiniteFunction(n, t)).table if n else ak.arange(0)
        return Spider(tuple(s2.tolist()), tuple(t2.tolist()), objs(labels))

    def image(leaf: Leaf) -> Term:
        match leaf:
            case Id(labels):
                return Id(objs(labels))
            case Twist(left, right):
                return Twist(objs(left), objs(right))
            case Gen(op, _):
                return arrow_terms[op]
            case Split(o) | Join(o) | Unit(o) | Counit(o) if len(object_map[o]) == 1:
                return type(leaf)(object_map[o][0])
            case Split(o):
                return spider_image((0,), (0, 0), (o,))
            case Join(o):
                return spider_image((0, 0), (0,), (o,))
            case Unit(o):
                return spider_image((), (0,), (o,))
            case Counit(o):
                return spider_image((0,), (), (o,))
            case Spider(s, t, labels):
                return spider_image(s, t, labels)
        raise TermTypeError(f"not a term: {leaf!r}")

    # rebuild bottom up without recursion
    nodes = [node for node, _ in preorder(term)]
    built: dict[int, Term] = {}
    for node in reversed(nodes):
        if is_node(node):
            built[id(node)] = type(node)(built[id(node.left)], built[id(node.right)])
        else:
            built[id(node)] = image(node)
    return built[id(term)]
