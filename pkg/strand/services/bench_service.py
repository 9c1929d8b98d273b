"""Benchmark terms of a given shape and time each phase of one-shot elaboration."""

import logging
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from strand.errors import StrandError
from strand.models.schemas import BenchRow
from strand.models.terms import Gen, Par, Seq, Term
from strand.services import array_kernel as ak
from strand.services import bipartite_multigraph as bm
from strand.services import diagram as dg
from strand.services import finite_function as ff
from strand.services.finite_function import FiniteFunction
from strand.services.signature import Signature
from strand.services.term_builder import sorted_wiring_maps, to_diagram_fast
from strand.services.tree_arrays import ancestor_maps_jump, tree_arrays

logger = logging.getLogger(__name__)

SHAPES = ("chain", "balanced", "random")
PHASES = ("tree", "tensor", "ancestor", "wiring", "coequalizer", "total")

BENCH_SIGNATURE = Signature(
    object_names=("A",),
    op_names=("f",),
    typings=((((0,), (0,)),),),
)


class BenchError(StrandError):
    """Raised when a benchmark is requested with an unknown shape or a bad size."""


# ── Terms ────────────────────────────────────────────────────────────────────

def _build(n: int, split: Callable[[int, int], int], combine: Callable[[Term, Term], Term]) -> Term:
    leaf = Gen(0)
    results: list[Term] = []
    stack: list[tuple[int, int, int, bool]] = [(0, n, 0, False)]
    while stack:
        lo, hi, mid, expanded = stack.pop()
        if hi - lo == 1:
            results.append(leaf)
        elif not expanded:
            mid = split(lo, hi)
            stack.append((lo, hi, mid, True))
            stack.append((mid, hi, 0, False))
            stack.append((lo, mid, 0, False))
        else:
            right = results.pop()
            left = results.pop()
            results.append(combine(left, right))
    return results[0]


def make_term(shape: str, leaves: int, seed: int = 0, parallel: bool = False) -> Term:
    """A term over :data:`BENCH_SIGNATURE` with *leaves* copies of ``f``.

    Args:
        shape: ``chain`` (left-nested), ``balanced`` (halving) or ``random`` (uniform split points).
        leaves: Number of leaves.
        seed: Seed for ``random``.
        parallel: Join subtrees with ``Par`` instead of ``Seq``.

    Raises:
        BenchError: For an unknown shape or fewer than one leaf.
    """
    if leaves < 1:
        raise BenchError("a benchmark term needs at least one leaf")
    rng = np.random.default_rng(seed)
    splits: dict[str, Callable[[int, int], int]] = {
        "chain": lambda lo, hi: hi - 1,
        "balanced": lambda lo, hi: (lo + hi) // 2,
        "random": lambda lo, hi: int(rng.integers(lo + 1, hi)),
    }
    if shape not in splits:
        raise BenchError(f"unknown shape {shape!r}; expected one of {', '.join(SHAPES)}")
    return _build(leaves, splits[shape], Par if parallel else Seq)


# ── Timing ───────────────────────────────────────────────────────────────────

def _phases(term: Term, sig: Signature) -> dict[str, float]:
    """Seconds spent in each phase of one elaboration."""
    out: dict[str, float] = {}
    clock = time.perf_counter

    t0 = clock()
    tree = tree_arrays(term)
    out["tree"] = clock() - t0

    t0 = clock()
    ops = ak.as_array([leaf.op for leaf in tree.leaves])
    tid = sig.typing_ids(ops, ak.zeros(len(ops)))
    g = dg.tensor_typing_ids(ops, tid, sig)
    out["tensor"] = clock() - t0

    t0 = clock()
    ancestor_maps_jump(tree)
    out["ancestor"] = clock() - t0

    ar, coar = sig.arity[tid], sig.coarity[tid]
    Ki, Ko = ak.sum_(ar), ak.sum_(coar)
    t0 = clock()
    wm = sorted_wiring_maps(
        tree,
        FiniteFunction(Ki + Ko, ak.arange(Ki)),
        FiniteFunction(Ki + Ko, Ki + ak.arange(Ko)),
        ar,
        coar,
    )
    out["wiring"] = clock() - t0

    t0 = clock()
    q = ff.coequalizer(wm.et_prime, wm.es_prime)
    bm.coequalize_wires(g.G, q)
    out["coequalizer"] = clock() - t0

    t0 = clock()
    to_diagram_fast(term, sig)
    out["total"] = clock() - t0
    return out


def run_benchmark(shape: str, leaves: int, repeat: int, seed: int = 0) -> list[BenchRow]:
    """Median milliseconds per phase over *repeat* runs on one term."""
    if repeat < 1:
        raise BenchError("repeat must be at least 1")
    term = make_term(shape, leaves, seed)
    runs = [_phases(term, BENCH_SIGNATURE) for _ in range(repeat)]
    rows = [
        BenchRow(
            shape=shape,
            leaves=leaves,
            phase=phase,
            median_ms=1000.0 * statistics.median(run[phase] for run in runs),
            repeat=repeat,
        )
        for phase in PHASES
    ]
    logger.debug("benchmark %s/%d: total %.3f ms", shape, leaves, rows[-1].median_ms)
    return rows


def time_callable(fn: Callable[[], object], repeat: int = 5) -> float:
    """Median wall time of *fn* in seconds."""
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def doubling_ratios(sizes: list[int], measure: Callable[[int], float]) -> list[float]:
    """``t(2N) / t(N)`` for consecutive *sizes*, as used by the linear-work checks."""
    times = [measure(n) for n in sizes]
    return [b / a if a > 0 else float("inf") for a, b in zip(times, times[1:])]


# ── Scaling ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ScalingStep:
    """Total time at two consecutive sizes of one shape; ``ratio`` is None when the smaller run took no time."""

    shape: str
    small: int
    large: int
    ratio: Optional[float]


def scaling_steps(rows: list[BenchRow], phase: str = "total") -> list[ScalingStep]:
    """Ratios of *phase* time between consecutive sizes, per shape in first-seen order."""
    by_shape: dict[str, dict[int, float]] = {}
    for row in rows:
        if row.phase == phase:
            by_shape.setdefault(row.shape, {})[row.leaves] = row.median_ms
    steps = []
    for shape, times in by_shape.items():
        sizes = sorted(times)
        for small, large in zip(sizes, sizes[1:]):
            ratio = times[large] / times[small] if times[small] > 0 else None
            steps.append(ScalingStep(shape, small, large, ratio))
    return steps
