"""Diagrams as cospans ``A → G ← B`` of labeled wires into a bipartite multigraph."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from strand.errors import StrandError
from strand.services import array_kernel as ak
from strand.services import bipartite_multigraph as bm
from strand.services import finite_function as ff
from strand.services.bipartite_multigraph import BipartiteMultigraph
from strand.services.finite_function import FiniteFunction
from strand.services.signature import ShapeMismatch, Signature

logger = logging.getLogger(__name__)


# ── Exceptions ───────────────────────────────────────────────────────────────

class DiagramError(StrandError):
    """Raised when a diagram operation is applied to incompatible diagrams."""


class TypingMismatch(DiagramError):
    """Raised when an operation is used at a typing it does not have."""


class BoundaryMismatch(DiagramError, ff.TypeMismatch):
    """Raised when composing diagrams whose boundary types differ."""


class NotWellFormed(DiagramError):
    """Raised when an operation requires a well-formed diagram."""


class NotMonogamousAcyclic(DiagramError):
    """Raised when an operation requires a monogamous acyclic diagram."""


# ── Type ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Diagram:
    """A structured cospan: source leg *s*, target leg *t*, apex graph *G*."""

    s: FiniteFunction
    t: FiniteFunction
    G: BipartiteMultigraph

    def __post_init__(self) -> None:
        if self.s.target != self.G.W or self.t.target != self.G.W:
            raise ShapeMismatch(
                f"legs into {self.s.target} and {self.t.target} wires, graph has {self.G.W}"
            )

    @property
    def source_type(self) -> FiniteFunction:
        return ff.compose(self.s, self.G.wn)

    @property
    def target_type(self) -> FiniteFunction:
        return ff.compose(self.t, self.G.wn)

    @property
    def is_spider(self) -> bool:
        return self.G.X == 0 and self.G.Ei == 0 and self.G.Eo == 0


# ── Primitives ───────────────────────────────────────────────────────────────

def identity_diagram(wn: FiniteFunction, sig: Signature) -> Diagram:
    n = wn.source
    return Diagram(ff.identity(n), ff.identity(n), bm.discrete(wn, sig))


def twist_diagram(a: FiniteFunction, b: FiniteFunction, sig: Signature) -> Diagram:
    n0, n1 = a.source, b.source
    return Diagram(ff.identity(n0 + n1), ff.twist(n1, n0), bm.discrete(ff.coproduct(a, b), sig))


def spider(s: FiniteFunction, t: FiniteFunction, wn: FiniteFunction, sig: Signature) -> Diagram:
    """The diagram ``(s, t, D(wn))`` with a discrete apex.

    Raises:
        ShapeMismatch: If the legs do not both land in ``len(wn)`` wires.
    """
    if s.target != wn.source or t.target != wn.source:
        raise ShapeMismatch(f"spider legs into {s.target} and {t.target} wires, {wn.source} labels")
    return Diagram(s, t, bm.discrete(wn, sig))


def half_spider(f: FiniteFunction, wn: FiniteFunction, sig: Signature) -> Diagram:
    """The spider ``(f, id, D(wn))`` induced by a labeled finite function."""
    return spider(f, ff.identity(wn.source), wn, sig)


def frobenius_generator(kind: str, label: int, sig: Signature) -> Diagram:
    """One of the four Frobenius generators on a single wire labeled *label*."""
    wn = sig.labeling([label])
    legs = {
        "split": (ff.terminal(1), ff.terminal(2)),
        "join": (ff.terminal(2), ff.terminal(1)),
        "unit": (ff.terminal(0), ff.terminal(1)),
        "counit": (ff.terminal(1), ff.terminal(0)),
    }
    if kind not in legs:
        raise DiagramError(f"unknown Frobenius generator {kind!r}")
    s, t = legs[kind]
    return spider(s, t, wn, sig)


def dagger(d: Diagram) -> Diagram:
    return Diagram(d.t, d.s, d.G)


def singleton(a: FiniteFunction, b: FiniteFunction, op: int, sig: Signature) -> Diagram:
    """The diagram of a single operation at typing ``a → b``.

    Raises:
        TypingMismatch: If ``(a, b)`` is not a typing of *op*.
    """
    typing = (tuple(int(v) for v in a.table), tuple(int(v) for v in b.table))
    if not 0 <= op < sig.n_ops or typing not in sig.typings[op]:
        raise TypingMismatch(f"operation {op} has no typing {typing}")
    na, nb = a.source, b.source
    G = BipartiteMultigraph(
        wi=ff.inj0(na, nb),
        wo=ff.inj1(na, nb),
        xi=ff.terminal(na),
        xo=ff.terminal(nb),
        pi=FiniteFunction(sig.port_bound, ak.arange(na)),
        po=FiniteFunction(sig.port_bound, ak.arange(nb)),
        wn=ff.coproduct(a, b),
        xn=FiniteFunction(sig.n_ops, [op]),
    )
    return Diagram(ff.inj0(na, nb), ff.inj1(na, nb), G)


# ── Tensor ───────────────────────────────────────────────────────────────────

def tensor(d0: Diagram, d1: Diagram) -> Diagram:
    """Parallel composition.

    Raises:
        SignatureMismatch: If the diagrams are typed over different signatures.
    """
    return Diagram(ff.tensor(d0.s, d1.s), ff.tensor(d0.t, d1.t), bm.coproduct(d0.G, d1.G))


def tensor_all(ds: Sequence[Diagram], sig: Signature) -> Diagram:
    """Tensor of many diagrams with a single concatenation per component."""
    if not ds:
        return identity_diagram(ff.initial(sig.n_objects), sig)
    return Diagram(
        ff.tensor_all([d.s for d in ds]),
        ff.tensor_all([d.t for d in ds]),
        bm.coproduct_all([d.G for d in ds], sig),
    )


def tensor_operations(ops: Sequence[tuple[int, int]], sig: Signature) -> Diagram:
    """Tensor of operations ``(op, typing)`` in closed form, built from bulk array ops.

    Wires are laid out as all source wires (operation by operation) followed
    by all target wires.

    Raises:
        TypingMismatch: If a typing index does not exist.
    """
    op_arr = ak.as_array([o for o, _ in ops])
    k_arr = ak.as_array([k for _, k in ops])
    try:
        tid = sig.typing_ids(op_arr, k_arr)
    except StrandError as exc:
        raise TypingMismatch(str(exc)) from exc
    return tensor_typing_ids(op_arr, tid, sig)


def tensor_typing_ids(op_arr: np.ndarray, tid: np.ndarray, sig: Signature) -> Diagram:
    """Closed-form tensor of operations given by label and global typing id."""
    N = len(op_arr)
    ar, coar = sig.arity[tid], sig.coarity[tid]
    Ki, Ko = ak.sum_(ar), ak.sum_(coar)

    # wire labels: gather each typing's sort segment from the flat sort arrays
    n_typ = sig.n_typings
    sel = FiniteFunction(max(n_typ, 1), tid)
    src = ff.injections(FiniteFunction(sig.port_bound + 1, sig.arity), sel) if n_typ else ff.initial(0)
    tgt = ff.injections(FiniteFunction(sig.port_bound + 1, sig.coarity), sel) if n_typ else ff.initial(0)
    wn = FiniteFunction(sig.n_objects, ak.concatenate([
        sig.source_sorts.table[src.table],
        sig.target_sorts.table[tgt.table],
    ]))

    G = BipartiteMultigraph(
        wi=ff.inj0(Ki, Ko),
        wo=ff.inj1(Ki, Ko),
        xi=FiniteFunction(N, ak.repeat(ak.arange(N), ar)),
        xo=FiniteFunction(N, ak.repeat(ak.arange(N), coar)),
        pi=FiniteFunction(sig.port_bound, ak.segmented_arange(ar)),
        po=FiniteFunction(sig.port_bound, ak.segmented_arange(coar)),
        wn=wn,
        xn=FiniteFunction(sig.n_ops, op_arr),
    )
    logger.debug("tensor_operations: %d operations, %d wires", N, Ki + Ko)
    return Diagram(ff.inj0(Ki, Ko), ff.inj1(Ki, Ko), G)


def n_fold_tensor_witness(
    ops: Sequence[tuple[int, int]], sig: Signature
) -> tuple[FiniteFunction, FiniteFunction, FiniteFunction, FiniteFunction]:
    """Isomorphism from ``tensor_operations(ops)`` to the fold of binary tensors of singletons.

    Returns ``(αW, αEi, αEo, αX)``. Only the wires move: in the folded tensor
    each operation keeps its source and target wires together.
    """
    tid = sig.typing_ids([o for o, _ in ops], [k for _, k in ops])
    ar, coar = sig.arity[tid], sig.coarity[tid]
    off = ak.prefix_sum(ar + coar)
    alpha_w = ak.concatenate([
        ak.repeat(off, ar) + ak.segmented_arange(ar),
        ak.repeat(off + ar, coar) + ak.segmented_arange(coar),
    ])
    W = ak.sum_(ar + coar)
    return (
        FiniteFunction(W, alpha_w),
        ff.identity(ak.sum_(ar)),
        ff.identity(ak.sum_(coar)),
        ff.identity(len(ops)),
    )


# ── Composition ──────────────────────────────────────────────────────────────

def compose(d0: Diagram, d1: Diagram) -> Diagram:
    """Sequential composition ``d0 ; d1``: glue the target of *d0* to the source of *d1*.

    Raises:
        BoundaryMismatch: If the target type of *d0* differs from the source type of *d1*.
    """
    if d0.target_type != d1.source_type:
        raise BoundaryMismatch(
            f"cannot compose: target {d0.target_type.table.tolist()} "
            f"vs source {d1.source_type.table.tolist()}"
        )
    W0, W1 = d0.G.W, d1.G.W
    i0, i1 = ff.inj0(W0, W1), ff.inj1(W0, W1)
    q = ff.coequalizer(ff.compose(d0.t, i0), ff.compose(d1.s, i1))
    G = bm.coequalize_wires(bm.coproduct(d0.G, d1.G), q)
    return Diagram(ff.compose(ff.compose(d0.s, i0), q), ff.compose(ff.compose(d1.t, i1), q), G)


def compose_all(ds: Sequence[Diagram]) -> Diagram:
    if not ds:
        raise DiagramError("compose_all of no diagrams")
    out = ds[0]
    for d in ds[1:]:
        out = compose(out, d)
    return out


# ── Spider normal form ───────────────────────────────────────────────────────

def spider_normal_form(d: Diagram) -> tuple[FiniteFunction, FiniteFunction, FiniteFunction]:
    """Canonical ``(s, t, wn)`` of a spider.

    Wires reached by a leg are numbered by first occurrence along ``s`` then
    ``t``; unreached wires follow, ordered by label.
    """
    if not d.is_spider:
        raise DiagramError("spider normal form of a diagram with operations")
    W = d.G.W
    legs = ak.concatenate([d.s.table, d.t.table])
    first = np.full(W, len(legs), dtype=ak.DTYPE)
    np.minimum.at(first, legs, ak.arange(len(legs)))
    isolated_key = len(legs) + d.G.wn.table
    key = np.where(first < len(legs), first, isolated_key)
    order = np.lexsort((ak.arange(W), key))
    rank = np.empty(W, dtype=ak.DTYPE)
    rank[order] = ak.arange(W)
    return (
        FiniteFunction(W, rank[d.s.table]),
        FiniteFunction(W, rank[d.t.table]),
        FiniteFunction(d.G.wn.target, d.G.wn.table[order]),
    )


def spiders_equal(d0: Diagram, d1: Diagram) -> bool:
    """Equality of spiders as morphisms: compare normal forms."""
    return spider_normal_form(d0) == spider_normal_form(d1)
