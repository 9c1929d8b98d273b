"""Text formats: signature files, term s-expressions and functor files."""

import logging
import re
from dataclasses import dataclass
from typing import Iterator, Union

from strand.errors import StrandError
from strand.models.terms import (
    Counit,
    Gen,
    Id,
    Join,
    Leaf,
    Seq,
    Spider,
    Split,
    Term,
    Twist,
    Unit,
    is_node,
    par_all,
    seq_all,
)
from strand.services.diagram import Diagram
from strand.services.functor_map import EncodingMismatch, FunctorEncoding
from strand.services.signature import Signature
from strand.services.term_builder import infer_type, to_diagram_fast

logger = logging.getLogger(__name__)

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


# ── Exceptions ───────────────────────────────────────────────────────────────

class ParseError(StrandError):
    """Raised when text does not follow its grammar; carries a 1-based position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}")
        self.reason = message
        self.line = line
        self.column = column


class DuplicateName(ParseError):
    """Raised when an object is declared twice or an operation typing is repeated."""


class UnknownObject(ParseError):
    """Raised when a name refers to an undeclared object."""


# ── Signatures ───────────────────────────────────────────────────────────────

def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def _check_name(name: str, line: int, column: int) -> str:
    if not _NAME.match(name):
        raise ParseError(f"invalid name {name!r}", line, column)
    return name


def parse_signature(text: str) -> Signature:
    """Parse ``object <Name>`` and ``op <name> : <Obj>* -> <Obj>*`` lines.

    Repeating an ``op`` line with another typing makes the operation
    polymorphic; terms pick a typing with ``name@k`` in declaration order.

    Raises:
        ParseError: On a malformed line.
        DuplicateName: On a repeated object or a repeated typing.
        UnknownObject: When a typing uses an undeclared object.
    """
    objects: dict[str, int] = {}
    ops: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        words = line.split()
        if not words:
            continue
        col = line.index(words[0]) + 1
        keyword = words[0]
        if keyword == "object":
            if len(words) != 2:
                raise ParseError("expected 'object <Name>'", lineno, col)
            name = _check_name(words[1], lineno, line.index(words[1], col) + 1)
            if name in objects:
                raise DuplicateName(f"object {name!r} declared twice", lineno, col)
            objects[name] = len(objects)
        elif keyword == "op":
            head, sep, body = line.partition(":")
            if not sep or "->" not in body:
                raise ParseError("expected 'op <name> : <Obj>* -> <Obj>*'", lineno, col)
            head_words = head.split()
            if len(head_words) != 2:
                raise ParseError("expected exactly one operation name before ':'", lineno, col)
            name = _check_name(head_words[1], lineno, head.index(head_words[1]) + 1)
            src, _, tgt = body.partition("->")
            offset = len(head) + 1
            typing = (
                _sorts(src, objects, lineno, offset + 1),
                _sorts(tgt, objects, lineno, offset + len(src) + 3),
            )
            typings = ops.setdefault(name, [])
            if typing in typings:
                raise DuplicateName(f"operation {name!r} repeats a typing", lineno, col)
            typings.append(typing)
        else:
            raise ParseError(f"unknown declaration {keyword!r}", lineno, col)

    sig = Signature(
        object_names=tuple(objects),
        op_names=tuple(ops),
        typings=tuple(tuple(ts) for ts in ops.values()),
    )
    logger.debug("parsed signature: %d objects, %d operations", sig.n_objects, sig.n_ops)
    return sig


def _sorts(text: str, objects: dict[str, int], line: int, column: int) -> tuple[int, ...]:
    out = []
    for m in re.finditer(r"\S+", text):
        name = m.group()
        if name not in objects:
            raise UnknownObject(f"unknown object {name!r}", line, column + m.start())
        out.append(objects[name])
    return tuple(out)


def print_signature(sig: Signature) -> str:
    lines = [f"object {name}" for name in sig.object_names]
    for name, typings in zip(sig.op_names, sig.typings):
        for a, b in typings:
            src = " ".join(sig.object_names[o] for o in a)
            tgt = " ".join(sig.object_names[o] for o in b)
            lines.append(f"op {name} : {src} -> {tgt}".replace("  ", " ").rstrip())
    return "\n".join(lines) + "\n"


# ── S-expressions ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class _Atom:
    text: str
    line: int
    column: int


@dataclass
class _List:
    items: list
    line: int
    column: int


_Node = Union[_Atom, _List]


def _tokens(text: str) -> Iterator[tuple[str, int, int]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        for m in re.finditer(r"[()]|[^\s()]+", line):
            yield m.group(), lineno, m.start() + 1


def _read(text: str) -> list[_Node]:
    top: list[_Node] = []
    stack: list[_List] = []
    for tok, line, col in _tokens(text):
        if tok == "(":
            stack.append(_List([], line, col))
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            (stack[-1].items if stack else top).append(_Atom(tok, line, col))
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].column)
    return top


def _head(node: _Node) -> str:
    if isinstance(node, _Atom):
        raise ParseError(f"expected a form, got {node.text!r}", node.line, node.column)
    if not node.items or not isinstance(node.items[0], _Atom):
        raise ParseError("form must start with a keyword", node.line, node.column)
    return node.items[0].text


# ── Terms ────────────────────────────────────────────────────────────────────

_FROBENIUS = {"split": Split, "join": Join, "unit": Unit, "counit": Counit}


def _object(atom: _Node, sig: Signature) -> int:
    if not isinstance(atom, _Atom):
        raise ParseError("expected an object name", atom.line, atom.column)
    try:
        return sig.object_index(atom.text)
    except KeyError:
        raise UnknownObject(f"unknown object {atom.text!r}", atom.line, atom.column) from None


def _objects(node: _Node, sig: Signature) -> tuple[int, ...]:
    if not isinstance(node, _List):
        raise ParseError("expected a parenthesized list of objects", node.line, node.column)
    return tuple(_object(a, sig) for a in node.items)


def _ints(node: _Node) -> tuple[int, ...]:
    if not isinstance(node, _List):
        raise ParseError("expected a parenthesized list of integers", node.line, node.column)
    out = []
    for a in node.items:
        if not isinstance(a, _Atom) or not a.text.isdigit():
            raise ParseError("expected a non-negative integer", a.line, a.column)
        out.append(int(a.text))
    return tuple(out)


def _gen(node: _List, sig: Signature) -> Gen:
    if len(node.items) != 2 or not isinstance(node.items[1], _Atom):
        raise ParseError("expected '(gen <name>)' or '(gen <name>@<k>)'", node.line, node.column)
    atom = node.items[1]
    name, at, k = atom.text.partition("@")
    if at and not k.isdigit():
        raise ParseError(f"bad typing index in {atom.text!r}", atom.line, atom.column)
    try:
        op = sig.op_index(name)
    except KeyError:
        raise ParseError(f"unknown operation {name!r}", atom.line, atom.column) from None
    return Gen(op, int(k) if at else 0)


def _leaf(node: _List, head: str, sig: Signature) -> Leaf:
    args = node.items[1:]
    if head == "id":
        return Id(tuple(_object(a, sig) for a in args))
    if head == "gen":
        return _gen(node, sig)
    if head in _FROBENIUS:
        if len(args) != 1:
            raise ParseError(f"expected '({head} <Obj>)'", node.line, node.column)
        return _FROBENIUS[head](_object(args[0], sig))
    if head == "twist":
        if len(args) != 2:
            raise ParseError("expected '(twist (<Obj>*) (<Obj>*))'", node.line, node.column)
        return Twist(_objects(args[0], sig), _objects(args[1], sig))
    if head == "spider":
        if len(args) != 3:
            raise ParseError("expected '(spider (<Obj>*) (<int>*) (<int>*))'", node.line, node.column)
        return Spider(_ints(args[1]), _ints(args[2]), _objects(args[0], sig))
    raise ParseError(f"unknown form {head!r}", node.line, node.column)


def _to_term(root: _Node, sig: Signature) -> Term:
    out: list[Term] = []
    stack: list[tuple[_Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        head = _head(node)
        if head in ("seq", "par"):
            args = node.items[1:]
            if not expanded:
                if len(args) < 2:
                    raise ParseError(f"'{head}' needs at least two subterms", node.line, node.column)
                stack.append((node, True))
                stack.extend((a, False) for a in reversed(args))
                continue
            parts = out[-len(args):]
            del out[-len(args):]
            out.append(seq_all(parts) if head == "seq" else par_all(parts))
        else:
            out.append(_leaf(node, head, sig))
    return out[0]


def parse_term(text: str, sig: Signature, check: bool = True) -> Term:
    """Parse one term s-expression over *sig*.

    Args:
        text: The term, e.g. ``(seq (gen f) (par (id A) (gen g@1)))``.
        sig: Signature resolving object and operation names.
        check: Also infer the term's type.

    Raises:
        ParseError: On malformed text.
        UnknownObject: On an undeclared object name.
        TermTypeError: When ``check`` is set and the term is ill-typed.
    """
    nodes = _read(text)
    if len(nodes) != 1:
        line, col = (nodes[1].line, nodes[1].column) if len(nodes) > 1 else (1, 1)
        raise ParseError(f"expected exactly one term, found {len(nodes)}", line, col)
    term = _to_term(nodes[0], sig)
    if check:
        infer_type(term, sig)
    return term


def _words(labels, sig: Signature) -> str:
    return " ".join(sig.object_names[o] for o in labels)


def _leaf_text(leaf: Leaf, sig: Signature) -> str:
    match leaf:
        case Id(labels):
            return f"(id {_words(labels, sig)})" if labels else "(id)"
        case Twist(left, right):
            return f"(twist ({_words(left, sig)}) ({_words(right, sig)}))"
        case Gen(op, k):
            name = sig.op_names[op]
            return f"(gen {name}@{k})" if len(sig.typings[op]) > 1 else f"(gen {name})"
        case Spider(s, t, labels):
            return (f"(spider ({_words(labels, sig)}) ({' '.join(map(str, s))}) "
                    f"({' '.join(map(str, t))}))")
        case Split(o) | Join(o) | Unit(o) | Counit(o):
            return f"({type(leaf).__name__.lower()} {sig.object_names[o]})"
    raise TypeError(f"not a term: {leaf!r}")


def print_term(term: Term, sig: Signature) -> str:
    """Render a term as an s-expression that :func:`parse_term` reads back."""
    parts: list[str] = []
    stack: list = [term]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
        elif is_node(item):
            kw = "seq" if isinstance(item, Seq) else "par"
            stack.extend([")", item.right, " ", item.left, f"({kw} "])
        else:
            parts.append(_leaf_text(item, sig))
    return "".join(parts)


# ── Functor files ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FunctorDefinition:
    """A functor given by object images and one term per generator."""

    source_sig: Signature
    target_sig: Signature
    object_images: tuple[tuple[int, ...], ...]
    arrow_terms: dict[int, Term]

    def object_map(self) -> dict[int, tuple[int, ...]]:
        return dict(enumerate(self.object_images))

    def encode(self) -> FunctorEncoding:
        """Elaborate every arrow term and build the validated encoding."""
        diagrams: list[Diagram] = [
            to_diagram_fast(self.arrow_terms[op], self.target_sig) for op in range(self.source_sig.n_ops)
        ]
        return FunctorEncoding.from_diagrams(self.source_sig, self.target_sig, self.object_images, diagrams)


def _statements(text: str) -> Iterator[tuple[str, int, int]]:
    """Logical statements; an ``arrow`` term may continue over several lines."""
    pending, start, depth = "", (0, 0), 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not pending and not line.strip():
            continue
        if not pending:
            start = (lineno, len(line) - len(line.lstrip()) + 1)
        pending += line + "\n"
        depth += line.count("(") - line.count(")")
        if depth <= 0:
            yield pending, *start
            pending, depth = "", 0
    if pending:
        raise ParseError("unclosed '(' in arrow term", *start)


def parse_functor(text: str, source_sig: Signature, target_sig: Signature) -> FunctorDefinition:
    """Parse ``object <Obj> -> <Obj'>*`` and ``arrow <op> = <term>`` statements.

    Arrow terms are written over *target_sig* and may span lines.

    Raises:
        ParseError: On a malformed statement, a repeated definition, or a missing image.
        UnknownObject: On an undeclared object name.
        TermTypeError: When an arrow term is ill-typed.
    """
    images: dict[int, tuple[int, ...]] = {}
    arrows: dict[int, Term] = {}
    for stmt, line, col in _statements(text):
        keyword, _, rest = stmt.strip().partition(" ")
        if keyword == "object":
            lhs, arrow, rhs = rest.partition("->")
            if not arrow or len(lhs.split()) != 1:
                raise ParseError("expected 'object <Obj> -> <Obj>*'", line, col)
            name = lhs.strip()
            if name not in source_sig.object_names:
                raise UnknownObject(f"unknown object {name!r}", line, col)
            o = source_sig.object_index(name)
            if o in images:
                raise DuplicateName(f"object {name!r} mapped twice", line, col)
            images[o] = _sorts(rhs, dict((n, i) for i, n in enumerate(target_sig.object_names)), line, col)
        elif keyword == "arrow":
            lhs, eq, body = rest.partition("=")
            name = lhs.strip()
            if not eq or name not in source_sig.op_names:
                raise ParseError(f"expected 'arrow <op> = <term>' with a known operation, got {name!r}", line, col)
            op = source_sig.op_index(name)
            if op in arrows:
                raise DuplicateName(f"arrow {name!r} defined twice", line, col)
            arrows[op] = parse_term(body, target_sig)
        else:
            raise ParseError(f"unknown statement {keyword!r}", line, col)

    missing_obj = [source_sig.object_names[o] for o in range(source_sig.n_objects) if o not in images]
    missing_op = [source_sig.op_names[op] for op in range(source_sig.n_ops) if op not in arrows]
    if missing_obj or missing_op:
        raise EncodingMismatch(f"functor has no image for {', '.join(missing_obj + missing_op)}")
    return FunctorDefinition(
        source_sig=source_sig,
        target_sig=target_sig,
        object_images=tuple(images[o] for o in range(source_sig.n_objects)),
        arrow_terms=arrows,
    )
