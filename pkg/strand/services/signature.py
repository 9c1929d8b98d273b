"""Monoidal signatures, wire labelings and label-preserving maps."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from strand.errors import StrandError
from strand.services import array_kernel as ak
from strand.services.finite_function import FiniteFunction, compose

Typing = tuple[tuple[int, ...], tuple[int, ...]]


# ── Exceptions ───────────────────────────────────────────────────────────────

class SignatureError(StrandError):
    """Raised when a signature or labeling is malformed."""


class ShapeMismatch(SignatureError):
    """Raised when a map and its labelings have incompatible sizes."""


class IndexOutOfRange(SignatureError):
    """Raised when an object, operation or typing index does not exist."""


class NotLabelPreserving(SignatureError):
    """Raised when a map between labeled wires changes some label."""


# ── Signature ────────────────────────────────────────────────────────────────

class Signature(BaseModel):
    """Generating objects, operations, and for each operation one or more typings.

    Sorts are dense indices into ``object_names``. Every typing of every
    operation gets a global id (declaration order); the flat arrays below are
    indexed by it.
    """

    model_config = ConfigDict(frozen=True)

    object_names: tuple[str, ...] = Field(default=(), description="Generating objects")
    op_names: tuple[str, ...] = Field(default=(), description="Generating operations")
    typings: tuple[tuple[Typing, ...], ...] = Field(default=(), description="Typings per operation")

    _typing_offsets: np.ndarray = PrivateAttr()
    _arity: np.ndarray = PrivateAttr()
    _coarity: np.ndarray = PrivateAttr()
    _source_sorts: np.ndarray = PrivateAttr()
    _target_sorts: np.ndarray = PrivateAttr()
    _object_index: dict[str, int] = PrivateAttr()
    _op_index: dict[str, int] = PrivateAttr()

    @model_validator(mode="after")
    def _check(self) -> "Signature":
        if len(set(self.object_names)) != len(self.object_names):
            raise ValueError("object names must be unique")
        if len(set(self.op_names)) != len(self.op_names):
            raise ValueError("operation names must be unique")
        if len(self.typings) != len(self.op_names):
            raise ValueError(f"{len(self.op_names)} operations but {len(self.typings)} typing lists")
        n_obj = len(self.object_names)
        for name, ts in zip(self.op_names, self.typings):
            if not ts:
                raise ValueError(f"operation {name!r} has no typing")
            for a, b in ts:
                if any(not 0 <= o < n_obj for o in (*a, *b)):
                    raise ValueError(f"operation {name!r} uses a sort outside [0, {n_obj})")
        return self

    def model_post_init(self, __context) -> None:
        flat = [t for ts in self.typings for t in ts]
        self._typing_offsets = ak.prefix_sum([len(ts) for ts in self.typings])
        self._arity = ak.as_array([len(a) for a, _ in flat])
        self._coarity = ak.as_array([len(b) for _, b in flat])
        self._source_sorts = ak.as_array([o for a, _ in flat for o in a])
        self._target_sorts = ak.as_array([o for _, b in flat for o in b])
        self._object_index = {n: i for i, n in enumerate(self.object_names)}
        self._op_index = {n: i for i, n in enumerate(self.op_names)}

    # cached arrays are derived, so equality looks at declared fields only
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return (self.object_names, self.op_names, self.typings) == (
            other.object_names,
            other.op_names,
            other.typings,
        )

    def __hash__(self) -> int:
        return hash((self.object_names, self.op_names, self.typings))

    # ── Sizes ────────────────────────────────────────────────────────────

    @property
    def n_objects(self) -> int:
        return len(self.object_names)

    @property
    def n_ops(self) -> int:
        return len(self.op_names)

    @property
    def n_typings(self) -> int:
        return len(self._arity)

    @property
    def port_bound(self) -> int:
        """Codomain of port maps: the largest arity or coarity, at least 1."""
        return max(1, ak.max_or(self._arity, 0), ak.max_or(self._coarity, 0))

    def is_monomorphic(self) -> bool:
        return all(len(ts) == 1 for ts in self.typings)

    # ── Lookup ───────────────────────────────────────────────────────────

    def object_index(self, name: str) -> int:
        return self._object_index[name]

    def op_index(self, name: str) -> int:
        return self._op_index[name]

    def typing_id(self, op: int, k: int = 0) -> int:
        if not 0 <= op < self.n_ops:
            raise IndexOutOfRange(f"operation {op} not in signature of {self.n_ops} operations")
        if not 0 <= k < len(self.typings[op]):
            raise IndexOutOfRange(f"operation {self.op_names[op]!r} has no typing @{k}")
        return int(self._typing_offsets[op]) + k

    def typing_ids(self, ops: np.ndarray, ks: np.ndarray) -> np.ndarray:
        ops, ks = ak.as_array(ops), ak.as_array(ks)
        if len(ops) and (ops.min() < 0 or ops.max() >= self.n_ops):
            raise IndexOutOfRange("operation index out of range")
        n_typ = ak.as_array([len(ts) for ts in self.typings])
        if len(ks) and (ks.min() < 0 or np.any(ks >= n_typ[ops])):
            raise IndexOutOfRange("typing index out of range")
        return self._typing_offsets[ops] + ks

    # ── Flat per-typing arrays ───────────────────────────────────────────

    @property
    def arity(self) -> np.ndarray:
        return self._arity

    @property
    def coarity(self) -> np.ndarray:
        return self._coarity

    @property
    def source_sorts(self) -> FiniteFunction:
        """All source sorts, concatenated over global typing ids."""
        return FiniteFunction(self.n_objects, self._source_sorts)

    @property
    def target_sorts(self) -> FiniteFunction:
        return FiniteFunction(self.n_objects, self._target_sorts)

    def labeling(self, labels: Sequence[int]) -> FiniteFunction:
        """A labeling ``W → Obj`` from a sequence of object indices."""
        arr = ak.as_array(labels)
        if len(arr) and (arr.min() < 0 or arr.max() >= self.n_objects):
            raise IndexOutOfRange(f"label outside [0, {self.n_objects})")
        return FiniteFunction(self.n_objects, arr)

    def labeling_of_names(self, names: Sequence[str]) -> FiniteFunction:
        return self.labeling([self.object_index(n) for n in names])

    def type_names(self, labels: FiniteFunction) -> list[str]:
        return [self.object_names[i] for i in labels.table]


def typing_of(sig: Signature, op_index: int, typing_index: int = 0) -> Typing:
    """Return the chosen ``(source_sorts, target_sorts)`` of an operation.

    Raises:
        IndexOutOfRange: If either index is out of range.
    """
    sig.typing_id(op_index, typing_index)
    return sig.typings[op_index][typing_index]


# ── Labeled wires ────────────────────────────────────────────────────────────

def check_label_preserving(f: FiniteFunction, src_labels: FiniteFunction, tgt_labels: FiniteFunction) -> bool:
    """True iff ``f ; tgt_labels == src_labels``.

    Raises:
        ShapeMismatch: If *f* does not map ``len(src_labels)`` wires to ``len(tgt_labels)`` wires.
    """
    if f.source != src_labels.source or f.target != tgt_labels.source:
        raise ShapeMismatch(
            f"map {f.source}→{f.target} between {src_labels.source} and {tgt_labels.source} labeled wires"
        )
    return compose(f, tgt_labels) == src_labels


@dataclass(frozen=True)
class WiresMorphism:
    """A label-preserving map of labeled wires."""

    f: FiniteFunction
    source_labels: FiniteFunction
    target_labels: FiniteFunction

    def __post_init__(self) -> None:
        if not check_label_preserving(self.f, self.source_labels, self.target_labels):
            raise NotLabelPreserving(f"{self.f!r} does not preserve labels")

    def then(self, other: "WiresMorphism") -> "WiresMorphism":
        return WiresMorphism(compose(self.f, other.f), self.source_labels, other.target_labels)
