"""Syntax trees of terms over a signature, with Frobenius and spider leaves."""

from dataclasses import dataclass
from typing import Iterator, Union


# ── Leaves ───────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Id:
    labels: tuple[int, ...]


@dataclass(frozen=True)
class Twist:
    left: tuple[int, ...]
    right: tuple[int, ...]


@dataclass(frozen=True)
class Gen:
    """An operation occurrence; ``typing`` selects among polymorphic typings."""

    op: int
    typing: int = 0


@dataclass(frozen=True)
class Split:
    label: int


@dataclass(frozen=True)
class Join:
    label: int


@dataclass(frozen=True)
class Unit:
    label: int


@dataclass(frozen=True)
class Counit:
    label: int


@dataclass(frozen=True)
class Spider:
    """A spider given by its two legs into ``len(labels)`` wires."""

    s: tuple[int, ...]
    t: tuple[int, ...]
    labels: tuple[int, ...]


# ── Nodes ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Seq:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Par:
    left: "Term"
    right: "Term"


Leaf = Union[Id, Twist, Gen, Split, Join, Unit, Counit, Spider]
Term = Union[Leaf, Seq, Par]

FROBENIUS_LEAVES = (Split, Join, Unit, Counit, Spider)


def is_node(term: Term) -> bool:
    return isinstance(term, (Seq, Par))


# ── Traversals ───────────────────────────────────────────────────────────────
# Terms can be deep (long chains), so nothing here recurses.

def leaves(term: Term) -> list[Leaf]:
    """Leaves in left-to-right order."""
    out: list[Leaf] = []
    stack = [term]
    while stack:
        node = stack.pop()
        if is_node(node):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def preorder(term: Term) -> Iterator[tuple[Term, str]]:
    """Yield ``(subterm, path)`` in preorder; paths look like ``seq.left/par.right``."""
    stack: list[tuple[Term, str]] = [(term, "")]
    while stack:
        node, path = stack.pop()
        yield node, path
        if is_node(node):
            kind = "seq" if isinstance(node, Seq) else "par"
            prefix = f"{path}/" if path else ""
            stack.append((node.right, f"{prefix}{kind}.right"))
            stack.append((node.left, f"{prefix}{kind}.left"))


def is_frobenius_free(term: Term) -> bool:
    return not any(isinstance(leaf, FROBENIUS_LEAVES) for leaf in leaves(term))


def seq_all(terms: list[Term]) -> Term:
    """Left-nested ``Seq`` of a non-empty list."""
    out = terms[0]
    for t in terms[1:]:
        out = Seq(out, t)
    return out


def par_all(terms: list[Term]) -> Term:
    """Left-nested ``Par`` of a list; ``Id(())`` when empty."""
    if not terms:
        return Id(())
    out = terms[0]
    for t in terms[1:]:
        out = Par(out, t)
    return out
