"""The category of finite sets and functions, as integer arrays."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from strand.errors import StrandError
from strand.services import array_kernel as ak

logger = logging.getLogger(__name__)


# ── Exceptions ───────────────────────────────────────────────────────────────

class FiniteFunctionError(StrandError):
    """Raised when an operation on finite functions is ill-typed or undefined."""


class TypeMismatch(FiniteFunctionError):
    """Raised when the codomain of one function is not the domain of the next."""


class TargetMismatch(FiniteFunctionError):
    """Raised when functions that must share a codomain do not."""


class NotAFiber(FiniteFunctionError):
    """Raised when a function is not constant on the fibers of a quotient."""


class NotSurjective(FiniteFunctionError):
    """Raised when a quotient map misses some element of its codomain."""


class KeyNotMono(FiniteFunctionError):
    """Raised when a unique sort is requested for a non-injective key."""


# ── Type ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class FiniteFunction:
    """A function ``source → target`` stored as a dense table.

    ``source`` is the length of the table and is never stored separately.
    """

    target: int
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.array(self.table, dtype=ak.DTYPE).reshape(-1)
        table.flags.writeable = False
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "target", int(self.target))
        if self.target < 0:
            raise FiniteFunctionError(f"negative target {self.target}")
        if len(table) and (table.min() < 0 or table.max() >= self.target):
            raise FiniteFunctionError(
                f"table entries must lie in [0, {self.target}), got min={table.min()}, max={table.max()}"
            )

    @property
    def source(self) -> int:
        return len(self.table)

    def __len__(self) -> int:
        return len(self.table)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteFunction):
            return NotImplemented
        return self.target == other.target and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.target, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"FiniteFunction({self.target}, {self.table.tolist()})"

    def __rshift__(self, other: "FiniteFunction") -> "FiniteFunction":
        return compose(self, other)

    def __add__(self, other: "FiniteFunction") -> "FiniteFunction":
        return coproduct(self, other)

    def __matmul__(self, other: "FiniteFunction") -> "FiniteFunction":
        return tensor(self, other)

    def is_injective(self) -> bool:
        return len(np.unique(self.table)) == self.source

    def is_surjective(self) -> bool:
        return ak.all_(np.bincount(self.table, minlength=self.target) > 0)

    def is_permutation(self) -> bool:
        return self.source == self.target and self.is_injective()

    def inverse(self) -> "FiniteFunction":
        """Inverse of a permutation."""
        if not self.is_permutation():
            raise FiniteFunctionError(f"{self!r} is not a permutation")
        inv = np.empty(self.source, dtype=ak.DTYPE)
        inv[self.table] = ak.arange(self.source)
        return FiniteFunction(self.source, inv)


def _trusted(target: int, table: np.ndarray) -> FiniteFunction:
    # skips the range check; only for freshly computed tables known to be in range
    f = object.__new__(FiniteFunction)
    table = table.astype(ak.DTYPE, copy=False)
    table.flags.writeable = False
    object.__setattr__(f, "target", int(target))
    object.__setattr__(f, "table", table)
    return f


# ── Category structure ───────────────────────────────────────────────────────

def identity(n: int) -> FiniteFunction:
    return FiniteFunction(n, ak.arange(n))


def compose(f: FiniteFunction, g: FiniteFunction) -> FiniteFunction:
    """Diagrammatic composition ``f ; g``, i.e. ``i ↦ g[f[i]]``.

    Raises:
        TypeMismatch: If ``f.target != g.source``.
    """
    if f.target != g.source:
        raise TypeMismatch(f"cannot compose {f.source}→{f.target} with {g.source}→{g.target}")
    return _trusted(g.target, g.table[f.table])


def initial(b: int) -> FiniteFunction:
    return FiniteFunction(b, ak.arange(0))


def terminal(a: int) -> FiniteFunction:
    return FiniteFunction(1, ak.zeros(a))


# ── Coproducts ───────────────────────────────────────────────────────────────

def inj0(a: int, b: int) -> FiniteFunction:
    return FiniteFunction(a + b, ak.arange(a))


def inj1(a: int, b: int) -> FiniteFunction:
    return FiniteFunction(a + b, ak.arange(b) + a)


def coproduct(f: FiniteFunction, g: FiniteFunction) -> FiniteFunction:
    """Copairing ``[f, g]``: concatenation of tables over a shared target.

    Raises:
        TargetMismatch: If the targets differ.
    """
    if f.target != g.target:
        raise TargetMismatch(f"coproduct of functions into {f.target} and {g.target}")
    return _trusted(f.target, ak.concatenate([f.table, g.table]))


def coproduct_all(fs: Sequence[FiniteFunction], target: int) -> FiniteFunction:
    """Copairing of many functions into *target* with one concatenation."""
    for f in fs:
        if f.target != target:
            raise TargetMismatch(f"coproduct of a function into {f.target}, expected {target}")
    return _trusted(target, ak.concatenate([f.table for f in fs]))


# ── Monoidal structure ───────────────────────────────────────────────────────

def tensor(f: FiniteFunction, g: FiniteFunction) -> FiniteFunction:
    return _trusted(f.target + g.target, ak.concatenate([f.table, g.table + f.target]))


def tensor_all(fs: Sequence[FiniteFunction]) -> FiniteFunction:
    """Tensor of many functions: block-diagonal sum with one concatenation."""
    if not fs:
        return identity(0)
    targets = ak.as_array([f.target for f in fs])
    sources = ak.as_array([f.source for f in fs])
    offsets = ak.repeat(ak.prefix_sum(targets), sources)
    table = ak.concatenate([f.table for f in fs]) + offsets
    return _trusted(ak.sum_(targets), table)


def twist(a: int, b: int) -> FiniteFunction:
    return coproduct(inj1(b, a), inj0(b, a))


# ── Coequalizers ─────────────────────────────────────────────────────────────

def coequalizer(f: FiniteFunction, g: FiniteFunction) -> FiniteFunction:
    """The quotient ``q : B → Q`` identifying ``f(i)`` with ``g(i)`` for every ``i``.

    Raises:
        TypeMismatch: If *f* and *g* are not a parallel pair.
    """
    if f.source != g.source or f.target != g.target:
        raise TypeMismatch(f"not a parallel pair: {f.source}→{f.target} and {g.source}→{g.target}")
    n_comp, labels = ak.connected_components(f.table, g.table, f.target)
    return _trusted(n_comp, labels)


def universal(q: FiniteFunction, f: FiniteFunction) -> FiniteFunction:
    """The unique ``u`` with ``q ; u = f``, for a surjection *q*.

    Raises:
        TypeMismatch: If *q* and *f* have different sources.
        NotSurjective: If some element of ``q.target`` has an empty fiber.
        NotAFiber: If *f* is not constant on a fiber of *q*.
    """
    if q.source != f.source:
        raise TypeMismatch(f"universal: quotient has source {q.source}, function has source {f.source}")
    if not q.is_surjective():
        missing = np.flatnonzero(np.bincount(q.table, minlength=q.target) == 0)
        raise NotSurjective(f"quotient misses {missing[:5].tolist()}")
    table = np.empty(q.target, dtype=ak.DTYPE)
    table[q.table] = f.table
    clash = np.flatnonzero(table[q.table] != f.table)
    if len(clash):
        i = int(clash[0])
        raise NotAFiber(
            f"fiber {int(q.table[i])} maps to both {int(table[q.table[i]])} and {int(f.table[i])}"
        )
    return _trusted(f.target, table)


# ── Sorting permutations ─────────────────────────────────────────────────────

def stable_sort_by_key(key: FiniteFunction) -> FiniteFunction:
    """The permutation ``p`` with ``p ; key`` non-decreasing, ties kept in order."""
    return _trusted(key.source, ak.stable_argsort_dense(key.table, key.target))


def sort_by_mono_key(key: FiniteFunction) -> FiniteFunction:
    """The unique sorting permutation of an injective key.

    Raises:
        KeyNotMono: If *key* is not injective.
    """
    if not key.is_injective():
        raise KeyNotMono(f"sort key of size {key.source} into {key.target} is not injective")
    return stable_sort_by_key(key)


# ── Segmented injections ─────────────────────────────────────────────────────

def injections(s: FiniteFunction, x: FiniteFunction) -> FiniteFunction:
    """The copairing of coproduct injections ``Σ_i inj_{x(i)}`` into ``sum(s)``.

    *s* gives segment sizes (``s.table[k]`` is the size of segment ``k``) and
    *x* selects segments in order.
    """
    if x.target != s.source:
        raise TypeMismatch(f"injections: selector has target {x.target}, sizes have source {s.source}")
    sizes = s.table[x.table]
    offsets = ak.prefix_sum(s.table)[x.table]
    table = ak.segmented_arange(sizes) + ak.repeat(offsets, sizes)
    return _trusted(ak.sum_(s.table), table)
