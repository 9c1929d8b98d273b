"""Flat array encoding of term trees and their ancestor maps."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from strand.models.terms import Leaf, Seq, Term, is_node
from strand.services import array_kernel as ak
from strand.services.finite_function import FiniteFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TreeArrays:
    """A binary term tree with ``n = 2m - 1`` nodes in preorder.

    Attributes:
        parent: Node → parent node, the root maps to ``n``.
        is_left: Node → 1 if it is a left child.
        is_right: Node → 1 if it is a right child.
        is_compose: Node → 1 if it is a sequential (``Seq``) node.
        leaf_nodes: Leaf position (left to right) → node index.
        internal_inorder: Node → inorder rank among internal nodes; leaves map to ``m - 1``.
        right_child: Node → its right child, leaves map to ``n``.
        leaves: The term's leaves, left to right.
    """

    parent: FiniteFunction
    is_left: FiniteFunction
    is_right: FiniteFunction
    is_compose: FiniteFunction
    leaf_nodes: FiniteFunction
    internal_inorder: FiniteFunction
    right_child: FiniteFunction
    leaves: tuple[Leaf, ...]

    @property
    def n_nodes(self) -> int:
        return self.parent.source

    @property
    def n_leaves(self) -> int:
        return self.leaf_nodes.source

    def path(self, node: int) -> str:
        """Slash-separated path from the root, e.g. ``seq.left/par.right``."""
        parts = []
        n = self.n_nodes
        parent = self.parent.table
        while parent[node] != n:
            p = int(parent[node])
            kind = "seq" if self.is_compose.table[p] else "par"
            side = "left" if self.is_left.table[node] else "right"
            parts.append(f"{kind}.{side}")
            node = p
        return "/".join(reversed(parts))


def tree_arrays(term: Term) -> TreeArrays:
    """Flatten *term* into preorder arrays."""
    parent: list[int] = []
    side: list[int] = []  # 0 left, 1 right, -1 root
    compose: list[int] = []
    leaves: list[Leaf] = []
    leaf_nodes: list[int] = []

    stack: list[tuple[Term, int, int]] = [(term, -1, -1)]
    while stack:
        node, p, sd = stack.pop()
        i = len(parent)
        parent.append(p)
        side.append(sd)
        if is_node(node):
            compose.append(1 if isinstance(node, Seq) else 0)
            stack.append((node.right, i, 1))
            stack.append((node.left, i, 0))
        else:
            compose.append(0)
            leaf_nodes.append(i)
            leaves.append(node)

    n, m = len(parent), len(leaves)
    par = ak.as_array(parent)
    par[par < 0] = n
    sd = ak.as_array(side)
    is_left = (sd == 0).astype(ak.DTYPE)
    is_right = (sd == 1).astype(ak.DTYPE)
    is_leaf = np.zeros(n, dtype=ak.DTYPE)
    is_leaf[leaf_nodes] = 1

    right_child = np.full(n, n, dtype=ak.DTYPE)
    rights = np.flatnonzero(is_right)
    right_child[par[rights]] = rights

    # an internal node's inorder rank is the number of leaves before its right child, minus one
    leaves_before = ak.prefix_sum(is_leaf)
    internal = np.flatnonzero(is_leaf == 0)
    inorder = np.full(n, m - 1, dtype=ak.DTYPE)
    inorder[internal] = leaves_before[right_child[internal]] - 1

    return TreeArrays(
        parent=FiniteFunction(n + 1, par),
        is_left=FiniteFunction(2, is_left),
        is_right=FiniteFunction(2, is_right),
        is_compose=FiniteFunction(2, ak.as_array(compose)),
        leaf_nodes=FiniteFunction(n, ak.as_array(leaf_nodes)),
        internal_inorder=FiniteFunction(m, inorder),
        right_child=FiniteFunction(n + 1, right_child),
        leaves=tuple(leaves),
    )


# ── Ancestor maps ────────────────────────────────────────────────────────────

def _to_leaf_numbering(tree: TreeArrays, anc_left: np.ndarray, anc_right: np.ndarray) -> tuple[FiniteFunction, FiniteFunction]:
    """Convert node-index ancestors (``n`` = none) to the leaf-indexed maps."""
    m = tree.n_leaves
    inorder = tree.internal_inorder.table
    left_ext = ak.concatenate([inorder + 1, [0]])
    right_ext = ak.concatenate([inorder, [m - 1]])
    return FiniteFunction(m, left_ext[anc_left]), FiniteFunction(m, right_ext[anc_right])


def ancestor_maps_recursive(tree: TreeArrays) -> tuple[FiniteFunction, FiniteFunction]:
    """Per leaf, the nearest ``Seq`` ancestor holding it on the right (``aL``) and on the left (``aR``).

    ``aL`` is 0 when there is none and the ancestor's inorder rank plus one
    otherwise; ``aR`` is the ancestor's inorder rank, or ``m - 1`` when there
    is none. Computed by one top-down pass over the preorder.
    """
    n = tree.n_nodes
    parent = tree.parent.table.tolist()
    is_left = tree.is_left.table.tolist()
    is_right = tree.is_right.table.tolist()
    P = tree.is_compose.table.tolist()
    L = [n] * n
    R = [n] * n
    for i in range(1, n):
        p = parent[i]
        L[i] = p if (is_right[i] and P[p]) else L[p]
        R[i] = p if (is_left[i] and P[p]) else R[p]
    leaves = tree.leaf_nodes.table
    return _to_leaf_numbering(tree, ak.as_array(L)[leaves], ak.as_array(R)[leaves])


def ancestor_graphs(tree: TreeArrays) -> tuple[np.ndarray, np.ndarray]:
    """Successor arrays of the left and right ancestor graphs on ``2n + 1`` vertices.

    Vertex ``2i + b`` stands for node ``i`` entered from its left (``b = 0``)
    or right (``b = 1``) child; ``2n`` is the sink beyond the root.
    """
    n = tree.n_nodes
    j = ak.arange(2 * n + 1)
    P = ak.concatenate([tree.is_compose.table, [0]])[j // 2]
    up = ak.concatenate([2 * tree.parent.table + tree.is_right.table, [2 * n]])[j // 2]
    sink = j == 2 * n
    odd = (j % 2) == 1
    r_left = np.where(sink | (odd & (P == 1)), j, up)
    r_right = np.where(sink | (~odd & (P == 1)), j, up)
    return r_left, r_right


def squarings_needed(n: int) -> int:
    return math.ceil(math.log2(n)) + 1 if n > 1 else 1


def ancestor_maps_jump(tree: TreeArrays) -> tuple[FiniteFunction, FiniteFunction]:
    """Same result as :func:`ancestor_maps_recursive`, by pointer jumping.

    Both ancestor graphs are squared ``ceil(log2 n) + 1`` times; every vertex
    then points at the fixed point ending its path.
    """
    n = tree.n_nodes
    f_left, f_right = ancestor_graphs(tree)
    k = squarings_needed(n)
    for _ in range(k):
        f_left = f_left[f_left]
        f_right = f_right[f_right]
    start = 2 * tree.leaf_nodes.table
    logger.debug("ancestor_maps_jump: n=%d, %d squarings", n, k)
    return _to_leaf_numbering(tree, f_left[start] // 2, f_right[start] // 2)
