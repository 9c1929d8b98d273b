"""Structural checks on diagrams: monogamy, acyclicity, canonical form, isomorphism witnesses."""

import heapq
import logging
from collections import deque
from typing import Optional

import numpy as np

from strand.services import array_kernel as ak
from strand.services import finite_function as ff
from strand.services.bipartite_multigraph import BipartiteMultigraph
from strand.services.diagram import Diagram, NotMonogamousAcyclic
from strand.services.finite_function import FiniteFunction

logger = logging.getLogger(__name__)


# ── Monogamy ─────────────────────────────────────────────────────────────────

def check_monogamous(d: Diagram) -> bool:
    """Every wire has exactly one producer and exactly one consumer.

    A producer is a source boundary position or an operation output; a
    consumer is a target boundary position or an operation input.
    """
    W = d.G.W
    if not (d.s.is_injective() and d.t.is_injective()):
        return False
    produced = np.bincount(d.G.wo.table, minlength=W) + np.bincount(d.s.table, minlength=W)
    consumed = np.bincount(d.G.wi.table, minlength=W) + np.bincount(d.t.table, minlength=W)
    return ak.all_(produced == 1) and ak.all_(consumed == 1)


# ── Acyclicity ───────────────────────────────────────────────────────────────

def topological_levels(G: BipartiteMultigraph) -> Optional[np.ndarray]:
    """Kahn elimination, one frontier at a time, on wires ``0..W-1`` and ops ``W..W+X-1``.

    Returns:
        Level of every node, or None if the graph has a cycle.
    """
    W, X = G.W, G.X
    n = W + X
    src = ak.concatenate([G.wi.table, W + G.xo.table])
    dst = ak.concatenate([W + G.xi.table, G.wo.table])
    indeg = np.bincount(dst, minlength=n).astype(ak.DTYPE)
    outdeg = np.bincount(src, minlength=n).astype(ak.DTYPE)
    by_src = dst[ak.stable_argsort_dense(src, max(n, 1))]
    start = ak.prefix_sum(outdeg)

    level = np.full(n, -1, dtype=ak.DTYPE)
    frontier = np.flatnonzero(indeg == 0)
    depth = 0
    while len(frontier):
        level[frontier] = depth
        counts = outdeg[frontier]
        nxt = by_src[ak.repeat(start[frontier], counts) + ak.segmented_arange(counts)]
        np.subtract.at(indeg, nxt, 1)
        frontier = np.unique(nxt[indeg[nxt] == 0])
        depth += 1

    if np.any(level < 0):
        return None
    return level


def check_acyclic(d: Diagram) -> bool:
    return topological_levels(d.G) is not None


def require_ma(d: Diagram) -> None:
    if not check_monogamous(d):
        raise NotMonogamousAcyclic("diagram is not monogamous")
    if not check_acyclic(d):
        raise NotMonogamousAcyclic("diagram has a cycle")


# ── Canonical form ───────────────────────────────────────────────────────────

class PortTables:
    """Per-op port-ordered wire lists of a diagram, and the producer and consumer of each wire."""

    def __init__(self, d: Diagram):
        G = d.G
        W, X = G.W, G.X
        bound = G.pi.target
        order_i = np.argsort(G.xi.table * bound + G.pi.table, kind="stable")
        order_o = np.argsort(G.xo.table * bound + G.po.table, kind="stable")
        ptr_i = ak.prefix_sum(np.bincount(G.xi.table, minlength=X)).tolist() + [G.Ei]
        ptr_o = ak.prefix_sum(np.bincount(G.xo.table, minlength=X)).tolist() + [G.Eo]
        wires_i = G.wi.table[order_i].tolist()
        wires_o = G.wo.table[order_o].tolist()
        self.inputs = [wires_i[ptr_i[x]:ptr_i[x + 1]] for x in range(X)]
        self.outputs = [wires_o[ptr_o[x]:ptr_o[x + 1]] for x in range(X)]

        # producer/consumer op and port of each wire; -1 means a boundary
        self.prod_op = np.full(W, -1, dtype=ak.DTYPE)
        self.prod_op[G.wo.table] = G.xo.table
        self.prod_port = np.full(W, -1, dtype=ak.DTYPE)
        self.prod_port[G.wo.table] = G.po.table
        self.cons_op = np.full(W, -1, dtype=ak.DTYPE)
        self.cons_op[G.wi.table] = G.xi.table
        self.cons_port = np.full(W, -1, dtype=ak.DTYPE)
        self.cons_port[G.wi.table] = G.pi.table
        self.prod_op, self.prod_port = self.prod_op.tolist(), self.prod_port.tolist()
        self.cons_op, self.cons_port = self.cons_op.tolist(), self.cons_port.tolist()


def _discover(ports: PortTables, seeds: list[int], rank: dict[int, int]) -> list[int]:
    """Breadth-first numbering of ops reachable from *seeds*; extends *rank* in place."""
    found: list[int] = []
    queue: deque[int] = deque()

    def visit(x: int) -> None:
        if x >= 0 and x not in rank:
            rank[x] = len(rank)
            found.append(x)
            queue.append(x)

    for x in seeds:
        visit(x)
    while queue:
        x = queue.popleft()
        for w in ports.inputs[x]:
            visit(ports.prod_op[w])
        for w in ports.outputs[x]:
            visit(ports.cons_op[w])
    return found


def _component_code(d: Diagram, ports: PortTables, root: int) -> tuple:
    rank: dict[int, int] = {}
    found = _discover(ports, [root], rank)
    wn, xn = d.G.wn.table, d.G.xn.table
    return tuple(
        (
            int(xn[x]),
            tuple((rank[ports.prod_op[w]], ports.prod_port[w]) for w in ports.inputs[x]),
            tuple((rank[ports.cons_op[w]], ports.cons_port[w], int(wn[w])) for w in ports.outputs[x]),
        )
        for x in found
    )


def _op_rank(d: Diagram, ports: PortTables) -> dict[int, int]:
    rank: dict[int, int] = {}
    seeds = [ports.cons_op[w] for w in d.s.table.tolist()] + [ports.prod_op[w] for w in d.t.table.tolist()]
    _discover(ports, seeds, rank)

    # closed components: root each at the op giving the least code
    remaining = [x for x in range(d.G.X) if x not in rank]
    closed = []
    while remaining:
        comp_rank: dict[int, int] = {}
        members = _discover(ports, [remaining[0]], comp_rank)
        best = min((_component_code(d, ports, r), r) for r in members)
        closed.append(best)
        member_set = set(members)
        remaining = [x for x in remaining if x not in member_set]
    for _, root in sorted(closed, key=lambda c: c[0]):
        _discover(ports, [root], rank)
    return rank


def _topological_order(d: Diagram, ports: PortTables, bfs_rank: dict[int, int]) -> list[int]:
    X = d.G.X
    deps = [0] * X
    succ: list[list[int]] = [[] for _ in range(X)]
    for x in range(X):
        for w in ports.inputs[x]:
            y = ports.prod_op[w]
            if y >= 0:
                deps[x] += 1
                succ[y].append(x)
    ready = [(bfs_rank[x], x) for x in range(X) if deps[x] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, x = heapq.heappop(ready)
        order.append(x)
        for y in succ[x]:
            deps[y] -= 1
            if deps[y] == 0:
                heapq.heappush(ready, (bfs_rank[y], y))
    return order


def canonicalize_ma(d: Diagram) -> Diagram:
    """Renumber wires, edges and operations of a monogamous acyclic diagram canonically.

    Operations are numbered along a topological order whose ties are broken
    by a breadth-first numbering seeded at the boundary (source positions,
    then target positions, then closed components by least encoding). Wires
    are numbered by source position, then by producing operation and port.
    Edges follow (operation, port). Isomorphic diagrams get equal results.

    Raises:
        NotMonogamousAcyclic: If *d* is not monogamous and acyclic.
    """
    require_ma(d)
    G = d.G
    ports = PortTables(d)
    order = _topological_order(d, ports, _op_rank(d, ports))

    op_rank = np.empty(G.X, dtype=ak.DTYPE)
    op_rank[order] = ak.arange(G.X)

    wire_order = d.s.table.tolist() + [w for x in order for w in ports.outputs[x]]
    wire_rank = np.empty(G.W, dtype=ak.DTYPE)
    wire_rank[wire_order] = ak.arange(G.W)

    bound = G.pi.target
    ei = np.argsort(op_rank[G.xi.table] * bound + G.pi.table, kind="stable")
    eo = np.argsort(op_rank[G.xo.table] * bound + G.po.table, kind="stable")
    wire_inv = ak.as_array(wire_order)
    op_inv = ak.as_array(order)

    H = BipartiteMultigraph(
        wi=FiniteFunction(G.W, wire_rank[G.wi.table[ei]]),
        wo=FiniteFunction(G.W, wire_rank[G.wo.table[eo]]),
        xi=FiniteFunction(G.X, op_rank[G.xi.table[ei]]),
        xo=FiniteFunction(G.X, op_rank[G.xo.table[eo]]),
        pi=FiniteFunction(bound, G.pi.table[ei]),
        po=FiniteFunction(bound, G.po.table[eo]),
        wn=FiniteFunction(G.wn.target, G.wn.table[wire_inv]),
        xn=FiniteFunction(G.xn.target, G.xn.table[op_inv]),
    )
    return Diagram(FiniteFunction(G.W, wire_rank[d.s.table]), FiniteFunction(G.W, wire_rank[d.t.table]), H)


# ── Isomorphism witnesses ────────────────────────────────────────────────────

def check_iso_witness(
    d0: Diagram,
    d1: Diagram,
    alpha_w: FiniteFunction,
    alpha_ei: FiniteFunction,
    alpha_eo: FiniteFunction,
    alpha_x: FiniteFunction,
) -> bool:
    """True iff the four permutations form an isomorphism ``d0 → d1`` of cospans."""
    g0, g1 = d0.G, d1.G
    sizes = [
        (alpha_w, g0.W, g1.W),
        (alpha_ei, g0.Ei, g1.Ei),
        (alpha_eo, g0.Eo, g1.Eo),
        (alpha_x, g0.X, g1.X),
    ]
    for alpha, n0, n1 in sizes:
        if alpha.source != n0 or alpha.target != n1 or not alpha.is_permutation():
            return False
    if g0.signature_key() != g1.signature_key():
        return False

    def commutes(f0: FiniteFunction, a: FiniteFunction, b: FiniteFunction, f1: FiniteFunction) -> bool:
        return ff.compose(f0, a) == ff.compose(b, f1)

    return all([
        commutes(g0.wi, alpha_w, alpha_ei, g1.wi),
        commutes(g0.wo, alpha_w, alpha_eo, g1.wo),
        commutes(g0.xi, alpha_x, alpha_ei, g1.xi),
        commutes(g0.xo, alpha_x, alpha_eo, g1.xo),
        g0.pi == ff.compose(alpha_ei, g1.pi),
        g0.po == ff.compose(alpha_eo, g1.po),
        g0.wn == ff.compose(alpha_w, g1.wn),
        g0.xn == ff.compose(alpha_x, g1.xn),
        ff.compose(d0.s, alpha_w) == d1.s,
        ff.compose(d0.t, alpha_w) == d1.t,
    ])
