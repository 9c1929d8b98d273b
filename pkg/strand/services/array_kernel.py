"""Primitive bulk operations on dense integer arrays."""

import logging
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _csgraph_components

from strand.errors import StrandError

logger = logging.getLogger(__name__)

DTYPE = np.int64


# ── Exceptions ───────────────────────────────────────────────────────────────

class KernelError(StrandError):
    """Raised when a bulk array primitive receives invalid input."""


class KeyOutOfRange(KernelError):
    """Raised when a sort key is not below the declared bound."""


class VertexOutOfRange(KernelError):
    """Raised when an edge endpoint is not a vertex of the graph."""


class LengthMismatch(KernelError):
    """Raised when two arrays that must align have different lengths."""


# ── Construction ─────────────────────────────────────────────────────────────

def as_array(x) -> np.ndarray:
    """Coerce *x* to a one-dimensional int64 array."""
    arr = np.asarray(x, dtype=DTYPE)
    return arr.reshape(-1)


def arange(n: int) -> np.ndarray:
    return np.arange(n, dtype=DTYPE)


def zeros(n: int) -> np.ndarray:
    return np.zeros(n, dtype=DTYPE)


# ── Reductions and scans ─────────────────────────────────────────────────────

def sum_(x: np.ndarray) -> int:
    return int(np.sum(x, dtype=DTYPE))


def prefix_sum(x: np.ndarray) -> np.ndarray:
    """Exclusive scan: ``p[i] = x[0] + … + x[i-1]``, same length as *x*."""
    x = as_array(x)
    out = np.zeros(len(x), dtype=DTYPE)
    if len(x) > 1:
        np.cumsum(x[:-1], out=out[1:])
    return out


def max_or(x: np.ndarray, default: int) -> int:
    return int(x.max()) if len(x) else default


def all_(x: np.ndarray) -> bool:
    return bool(np.all(x))


# ── Sorting ──────────────────────────────────────────────────────────────────

def stable_argsort_dense(x: np.ndarray, bound: int) -> np.ndarray:
    """Stable sorting permutation of keys drawn from ``range(bound)``.

    Args:
        x: Keys to sort.
        bound: Strict upper bound on every key.

    Returns:
        A permutation ``p`` of ``arange(len(x))`` with ``x[p]`` non-decreasing
        and ties kept in their original order.

    Raises:
        KeyOutOfRange: If some key is negative or not below *bound*.
    """
    x = as_array(x)
    if len(x) == 0:
        return arange(0)
    if x.min() < 0 or x.max() >= bound:
        raise KeyOutOfRange(f"sort key outside [0, {bound}): min={x.min()}, max={x.max()}")
    keys = x.astype(np.min_scalar_type(max(bound - 1, 0)), copy=False)
    return np.argsort(keys, kind="stable").astype(DTYPE, copy=False)


# ── Concatenation and repetition ─────────────────────────────────────────────

def concatenate(xs: Sequence[np.ndarray]) -> np.ndarray:
    if len(xs) == 0:
        return arange(0)
    return np.concatenate([as_array(x) for x in xs]).astype(DTYPE, copy=False)


def repeat(x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Concatenate ``s[i]`` copies of each ``x[i]``.

    Raises:
        LengthMismatch: If *x* and *s* differ in length.
    """
    x, s = as_array(x), as_array(s)
    if len(x) != len(s):
        raise LengthMismatch(f"repeat: values have length {len(x)} but counts have length {len(s)}")
    return np.repeat(x, s).astype(DTYPE, copy=False)


def segmented_arange(s: np.ndarray) -> np.ndarray:
    """``concatenate([arange(s[0]), arange(s[1]), …])`` without a Python loop."""
    s = as_array(s)
    return arange(sum_(s)) - repeat(prefix_sum(s), s)


# ── Graphs ───────────────────────────────────────────────────────────────────

def connected_components(sources: np.ndarray, targets: np.ndarray, n_vertices: int) -> tuple[int, np.ndarray]:
    """Connected components of the undirected graph with the given edge list.

    Components are numbered in order of their smallest vertex, so the labeling
    is independent of edge order and edge direction.

    Args:
        sources: One endpoint of each edge.
        targets: The other endpoint of each edge.
        n_vertices: Number of vertices.

    Returns:
        ``(Q, labels)`` where ``labels[v]`` in ``range(Q)`` names the component of *v*.

    Raises:
        LengthMismatch: If the endpoint arrays differ in length.
        VertexOutOfRange: If an endpoint is not below *n_vertices*.
    """
    sources, targets = as_array(sources), as_array(targets)
    if len(sources) != len(targets):
        raise LengthMismatch(f"edge endpoints differ in length: {len(sources)} vs {len(targets)}")
    if n_vertices == 0:
        if len(sources):
            raise VertexOutOfRange("edges given for a graph with no vertices")
        return 0, arange(0)
    if len(sources):
        lo = min(sources.min(), targets.min())
        hi = max(sources.max(), targets.max())
        if lo < 0 or hi >= n_vertices:
            raise VertexOutOfRange(f"edge endpoint outside [0, {n_vertices}): min={lo}, max={hi}")

    graph = coo_matrix(
        (np.ones(len(sources), dtype=bool), (sources, targets)),
        shape=(n_vertices, n_vertices),
    )
    n_comp, raw = _csgraph_components(graph, directed=False)

    # relabel by minimum vertex: the first occurrence of each raw label
    first = np.full(n_comp, n_vertices, dtype=DTYPE)
    np.minimum.at(first, raw, arange(n_vertices))
    rank = np.empty(n_comp, dtype=DTYPE)
    rank[np.argsort(first, kind="stable")] = arange(n_comp)

    logger.debug("connected_components: %d vertices, %d edges, %d components", n_vertices, len(sources), n_comp)
    return int(n_comp), rank[raw]
