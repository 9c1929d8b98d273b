"""Bipartite multigraphs: the internal wiring of a diagram."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from strand.errors import StrandError
from strand.services import array_kernel as ak
from strand.services import finite_function as ff
from strand.services.finite_function import FiniteFunction
from strand.services.signature import Signature

logger = logging.getLogger(__name__)


# ── Exceptions ───────────────────────────────────────────────────────────────

class GraphError(StrandError):
    """Raised when the eight maps of a graph do not fit together."""


class SignatureMismatch(GraphError):
    """Raised when graphs built over different signatures are combined."""


class LabelClash(GraphError):
    """Raised when wires with different labels are identified."""


class WellFormednessError(GraphError):
    """Raised when a graph is not well-formed with respect to its signature."""

    def __init__(self, message: str, op: int, edge: int | None = None):
        super().__init__(message)
        self.op = op
        self.edge = edge


class UnexpectedPort(WellFormednessError):
    """Raised when an edge uses a port number beyond the operation's arity."""


class DuplicatePort(WellFormednessError):
    """Raised when two edges of one operation carry the same port number."""


class MissingPort(WellFormednessError):
    """Raised when an operation has no edge for some port."""


class LabelMismatch(WellFormednessError):
    """Raised when a wire label differs from the sort its port expects."""


class NoMatchingTyping(WellFormednessError):
    """Raised when no typing of a polymorphic operation fits its edges."""


# ── Type ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class BipartiteMultigraph:
    """Wires and operations joined by port-numbered input and output edges.

    Attributes:
        wi: Input edge → wire it reads from.
        wo: Output edge → wire it writes to.
        xi: Input edge → operation it feeds.
        xo: Output edge → operation it leaves.
        pi: Input edge → port number.
        po: Output edge → port number.
        wn: Wire → object label.
        xn: Operation → operation label.
    """

    wi: FiniteFunction
    wo: FiniteFunction
    xi: FiniteFunction
    xo: FiniteFunction
    pi: FiniteFunction
    po: FiniteFunction
    wn: FiniteFunction
    xn: FiniteFunction

    def __post_init__(self) -> None:
        W, X = self.wn.source, self.xn.source
        checks = [
            (self.wi.target == W, "wi.target"),
            (self.wo.target == W, "wo.target"),
            (self.xi.target == X, "xi.target"),
            (self.xo.target == X, "xo.target"),
            (self.xi.source == self.wi.source, "xi.source"),
            (self.pi.source == self.wi.source, "pi.source"),
            (self.xo.source == self.wo.source, "xo.source"),
            (self.po.source == self.wo.source, "po.source"),
            (self.pi.target == self.po.target, "port bound"),
        ]
        bad = [name for ok, name in checks if not ok]
        if bad:
            raise GraphError(f"inconsistent graph maps: {', '.join(bad)}")

    # ── Sizes ────────────────────────────────────────────────────────────

    @property
    def W(self) -> int:
        return self.wn.source

    @property
    def Ei(self) -> int:
        return self.wi.source

    @property
    def Eo(self) -> int:
        return self.wo.source

    @property
    def X(self) -> int:
        return self.xn.source

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.W, self.Ei, self.Eo, self.X

    def signature_key(self) -> tuple[int, int, int]:
        """Object count, operation count and port bound this graph is typed over."""
        return self.wn.target, self.xn.target, self.pi.target

    def components(self) -> dict[str, FiniteFunction]:
        return {name: getattr(self, name) for name in _COMPONENTS}


_COMPONENTS = ("wi", "wo", "xi", "xo", "pi", "po", "wn", "xn")


def _require_same_signature(graphs: Sequence[BipartiteMultigraph]) -> None:
    keys = {g.signature_key() for g in graphs}
    if len(keys) > 1:
        raise SignatureMismatch(f"graphs typed over different signatures: {sorted(keys)}")


# ── Constructors ─────────────────────────────────────────────────────────────

def discrete(wn: FiniteFunction, sig: Signature) -> BipartiteMultigraph:
    """The graph with wires labeled by *wn* and no operations or edges."""
    W = wn.source
    return BipartiteMultigraph(
        wi=ff.initial(W),
        wo=ff.initial(W),
        xi=ff.initial(0),
        xo=ff.initial(0),
        pi=ff.initial(sig.port_bound),
        po=ff.initial(sig.port_bound),
        wn=wn,
        xn=ff.initial(sig.n_ops),
    )


def empty(sig: Signature) -> BipartiteMultigraph:
    return discrete(ff.initial(sig.n_objects), sig)


# ── Coproducts ───────────────────────────────────────────────────────────────

def coproduct(g0: BipartiteMultigraph, g1: BipartiteMultigraph) -> BipartiteMultigraph:
    """Disjoint union of two graphs.

    Raises:
        SignatureMismatch: If the graphs are typed over different signatures.
    """
    _require_same_signature([g0, g1])
    return BipartiteMultigraph(
        wi=ff.tensor(g0.wi, g1.wi),
        wo=ff.tensor(g0.wo, g1.wo),
        xi=ff.tensor(g0.xi, g1.xi),
        xo=ff.tensor(g0.xo, g1.xo),
        pi=ff.coproduct(g0.pi, g1.pi),
        po=ff.coproduct(g0.po, g1.po),
        wn=ff.coproduct(g0.wn, g1.wn),
        xn=ff.coproduct(g0.xn, g1.xn),
    )


def coproduct_all(graphs: Sequence[BipartiteMultigraph], sig: Signature) -> BipartiteMultigraph:
    """Disjoint union of many graphs, one concatenation per component."""
    if not graphs:
        return empty(sig)
    _require_same_signature(graphs)
    n_obj, n_ops, bound = graphs[0].signature_key()
    return BipartiteMultigraph(
        wi=ff.tensor_all([g.wi for g in graphs]),
        wo=ff.tensor_all([g.wo for g in graphs]),
        xi=ff.tensor_all([g.xi for g in graphs]),
        xo=ff.tensor_all([g.xo for g in graphs]),
        pi=ff.coproduct_all([g.pi for g in graphs], bound),
        po=ff.coproduct_all([g.po for g in graphs], bound),
        wn=ff.coproduct_all([g.wn for g in graphs], n_obj),
        xn=ff.coproduct_all([g.xn for g in graphs], n_ops),
    )


def coequalize_wires(g: BipartiteMultigraph, q: FiniteFunction) -> BipartiteMultigraph:
    """Quotient the wires of *g* along the surjection *q*.

    Raises:
        GraphError: If ``q.source != g.W``.
        LabelClash: If *q* merges wires with different labels.
    """
    if q.source != g.W:
        raise GraphError(f"quotient has source {q.source}, graph has {g.W} wires")
    try:
        wn = ff.universal(q, g.wn)
    except ff.NotAFiber as exc:
        raise LabelClash(f"composition identifies differently labeled wires: {exc}") from exc
    return BipartiteMultigraph(
        wi=ff.compose(g.wi, q),
        wo=ff.compose(g.wo, q),
        xi=g.xi,
        xo=g.xo,
        pi=g.pi,
        po=g.po,
        wn=wn,
        xn=g.xn,
    )


# ── Well-formedness ──────────────────────────────────────────────────────────

_OK, _UNEXPECTED, _DUPLICATE, _MISSING, _LABEL = 4, 0, 1, 2, 3
_ERRORS = {
    _UNEXPECTED: (UnexpectedPort, "edge uses a port beyond the operation's {side} arity"),
    _DUPLICATE: (DuplicatePort, "two {side} edges share a port number"),
    _MISSING: (MissingPort, "no {side} edge for some port"),
    _LABEL: (LabelMismatch, "{side} wire label differs from the expected sort"),
}


def _side_codes(
    code: np.ndarray,
    ops: np.ndarray,
    ports: np.ndarray,
    labels: np.ndarray,
    arity: np.ndarray,
    offsets: np.ndarray,
    sorts: np.ndarray,
    active: np.ndarray,
    bound: int,
) -> None:
    """Lower ``code[x]`` to the first failure among the edges on one side of each active op."""
    keep = active[ops]
    ops, ports, labels = ops[keep], ports[keep], labels[keep]
    X = len(code)

    unexpected = ports >= arity[ops]
    np.minimum.at(code, ops[unexpected], _UNEXPECTED)

    keys = ops * bound + ports
    uniq, counts = np.unique(keys, return_counts=True)
    np.minimum.at(code, uniq[counts > 1] // bound, _DUPLICATE)

    degree = np.bincount(ops, minlength=X)
    np.minimum.at(code, np.flatnonzero(active & (degree < arity)), _MISSING)

    ok = ~unexpected
    expected = sorts[offsets[ops[ok]] + ports[ok]]
    np.minimum.at(code, ops[ok][labels[ok] != expected], _LABEL)


def _check_typings(g: BipartiteMultigraph, sig: Signature, tid: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Per-op failure code when each active op ``x`` is checked against typing ``tid[x]``."""
    code = np.full(g.X, _OK, dtype=ak.DTYPE)
    arity = np.where(active, sig.arity[tid], 0) if g.X else ak.arange(0)
    coarity = np.where(active, sig.coarity[tid], 0) if g.X else ak.arange(0)
    src_off = ak.prefix_sum(sig.arity)[tid] if g.X else ak.arange(0)
    tgt_off = ak.prefix_sum(sig.coarity)[tid] if g.X else ak.arange(0)
    bound = sig.port_bound
    _side_codes(code, g.xi.table, g.pi.table, g.wn.table[g.wi.table], arity, src_off,
                sig.source_sorts.table, active, bound)
    _side_codes(code, g.xo.table, g.po.table, g.wn.table[g.wo.table], coarity, tgt_off,
                sig.target_sorts.table, active, bound)
    return code


def _first_edge(g: BipartiteMultigraph, op: int) -> int | None:
    hits = np.flatnonzero(g.xi.table == op)
    if len(hits):
        return int(hits[0])
    hits = np.flatnonzero(g.xo.table == op)
    return int(hits[0]) if len(hits) else None


def check_well_formed(g: BipartiteMultigraph, sig: Signature) -> np.ndarray:
    """Check *g* against *sig* and resolve a typing for every operation.

    Each operation is tried against the typings of its label in declaration
    order; the first typing whose ports and labels fit is chosen.

    Args:
        g: The graph to check.
        sig: The signature it should be well-formed over.

    Returns:
        Per-operation typing index (position within the operation's typing list).

    Raises:
        SignatureMismatch: If *g* is typed over a different signature.
        UnexpectedPort, DuplicatePort, MissingPort, LabelMismatch: For an
            operation with a single typing that does not fit.
        NoMatchingTyping: For a polymorphic operation none of whose typings fit.
    """
    if g.signature_key() != (sig.n_objects, sig.n_ops, sig.port_bound):
        raise SignatureMismatch(f"graph typed over {g.signature_key()}, signature has "
                                f"{(sig.n_objects, sig.n_ops, sig.port_bound)}")
    X = g.X
    n_typ = ak.as_array([len(ts) for ts in sig.typings])[g.xn.table] if X else ak.arange(0)
    resolved = np.full(X, -1, dtype=ak.DTYPE)
    ambiguous = np.zeros(X, dtype=bool)
    first_code = np.full(X, _OK, dtype=ak.DTYPE)

    for k in range(int(n_typ.max()) if X else 0):
        active = n_typ > k
        tid = np.where(active, sig.typing_ids(g.xn.table, np.minimum(k, n_typ - 1)), 0)
        code = _check_typings(g, sig, tid, active)
        if k == 0:
            first_code = code
        matches = active & (code == _OK)
        ambiguous |= matches & (resolved >= 0)
        resolved = np.where(matches & (resolved < 0), k, resolved)

    if np.any(ambiguous):
        logger.warning("%d operations match more than one typing; using the first match", int(ambiguous.sum()))

    failed = np.flatnonzero(resolved < 0)
    if len(failed):
        x = int(failed[0])
        name = sig.op_names[int(g.xn.table[x])]
        if n_typ[x] > 1:
            raise NoMatchingTyping(f"operation {x} ({name}): no typing fits its edges", op=x)
        code = int(first_code[x])
        exc_cls, template = _ERRORS[code]
        side = "input" if _side_fails(g, sig, x, code) else "output"
        raise exc_cls(f"operation {x} ({name}): " + template.format(side=side), op=x, edge=_first_edge(g, x))

    logger.debug("well-formed graph: W=%d Ei=%d Eo=%d X=%d", *g.shape)
    return resolved


def _side_fails(g: BipartiteMultigraph, sig: Signature, x: int, code: int) -> bool:
    """Whether the input side of op *x* alone already produces *code*."""
    active = np.zeros(g.X, dtype=bool)
    active[x] = True
    tid = np.zeros(g.X, dtype=ak.DTYPE)
    tid[x] = sig.typing_id(int(g.xn.table[x]), 0)
    probe = np.full(g.X, _OK, dtype=ak.DTYPE)
    arity = np.where(active, sig.arity[tid], 0)
    _side_codes(probe, g.xi.table, g.pi.table, g.wn.table[g.wi.table], arity,
                ak.prefix_sum(sig.arity)[tid], sig.source_sorts.table, active, sig.port_bound)
    return int(probe[x]) == code
