"""Optics of diagrams built with hypergraph structure, and reverse derivatives of arithmetic circuits."""

import logging
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from strand.errors import StrandError
from strand.models.terms import Gen, Id, Par, Seq, Spider, Term, par_all, seq_all
from strand.services import array_kernel as ak
from strand.services import bipartite_multigraph as bm
from strand.services import finite_function as ff
from strand.services.decomposition import resolve_typings
from strand.services.diagram import Diagram, compose_all, dagger, spider
from strand.services.evaluation import ARITHMETIC_SIGNATURE, R, ArityMismatch
from strand.services.finite_function import FiniteFunction, injections
from strand.services.functor_map import EncodingMismatch, FunctorEncoding, PolymorphicSignature, apply_functor
from strand.services.signature import Signature
from strand.services.term_builder import to_diagram_fast
from strand.services.validation import check_acyclic, check_monogamous

logger = logging.getLogger(__name__)

__all__ = [
    "ArityMismatch",
    "MissingOpticSpec",
    "NotAdaptable",
    "UnsupportedGenerator",
    "OpticArrow",
    "OpticSpec",
    "interleave",
    "optic_image",
    "to_optic",
    "adapt_ma",
    "reverse_derivative_spec",
    "rdiff",
]


# ── Exceptions ───────────────────────────────────────────────────────────────

class MissingOpticSpec(StrandError):
    """Raised when a diagram uses a generator the optic specification does not cover."""


class NotAdaptable(StrandError):
    """Raised when an optic diagram cannot be turned into a monogamous acyclic one."""


class UnsupportedGenerator(StrandError):
    """Raised when no reverse derivative is known for a generator."""


# ── Specification ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class OpticArrow:
    """Forward map ``A⃗ → B⃗ ⊗ M`` and reverse map ``M ⊗ B⃖ → A⃖`` of one generator."""

    fwd: Diagram
    rev: Diagram
    residual: tuple[int, ...]


@dataclass(frozen=True)
class OpticSpec:
    """Data of the optic transformation ``Σ → Ω``.

    Attributes:
        source_sig: Signature of the diagrams being transformed (one typing per operation).
        target_sig: Signature the forward and reverse maps live in.
        fwd_objects: Per Σ-object, its forward expansion as Ω-objects.
        rev_objects: Per Σ-object, its reverse expansion.
        arrows: Per Σ-operation index, its forward and reverse maps.
    """

    source_sig: Signature
    target_sig: Signature
    fwd_objects: tuple[tuple[int, ...], ...]
    rev_objects: tuple[tuple[int, ...], ...]
    arrows: Mapping[int, OpticArrow]

    def __post_init__(self) -> None:
        if not self.source_sig.is_monomorphic():
            raise PolymorphicSignature("optics are defined for signatures with one typing per generator")
        n = self.source_sig.n_objects
        if len(self.fwd_objects) != n or len(self.rev_objects) != n:
            raise EncodingMismatch(f"object expansions given for {len(self.fwd_objects)}/{len(self.rev_objects)} "
                                   f"of {n} objects")
        for op, arrow in self.arrows.items():
            self._check_arrow(op, arrow)

    def fwd_word(self, labels: Sequence[int]) -> tuple[int, ...]:
        return tuple(o2 for o in labels for o2 in self.fwd_objects[o])

    def rev_word(self, labels: Sequence[int]) -> tuple[int, ...]:
        return tuple(o2 for o in labels for o2 in self.rev_objects[o])

    def _check_arrow(self, op: int, arrow: OpticArrow) -> None:
        ((a, b),) = self.source_sig.typings[op]
        name = self.source_sig.op_names[op]
        want = {
            "forward source": (arrow.fwd.source_type, self.fwd_word(a)),
            "forward target": (arrow.fwd.target_type, self.fwd_word(b) + arrow.residual),
            "reverse source": (arrow.rev.source_type, arrow.residual + self.rev_word(b)),
            "reverse target": (arrow.rev.target_type, self.rev_word(a)),
        }
        for what, (got, expected) in want.items():
            if tuple(got.table.tolist()) != expected:
                raise EncodingMismatch(f"{name}: {what} is {got.table.tolist()}, expected {list(expected)}")


# ── Interleaving ─────────────────────────────────────────────────────────────

def _sizes(spec: OpticSpec, labels: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    f = ak.as_array([len(spec.fwd_objects[o]) for o in labels])
    r = ak.as_array([len(spec.rev_objects[o]) for o in labels])
    return f, r


def _interleaved(n: int) -> np.ndarray:
    return np.stack([ak.arange(n), n + ak.arange(n)], axis=1).reshape(-1)


def interleave(labels: Sequence[int], spec: OpticSpec) -> Diagram:
    """The permutation ``⊗A⃗ᵢ ⊗ ⊗A⃖ᵢ → ⊗(A⃗ᵢ ⊗ A⃖ᵢ)`` as a spider."""
    f, r = _sizes(spec, labels)
    n = len(labels)
    blocks = ak.concatenate([f, r])
    sizes = FiniteFunction(ak.max_or(blocks, 0) + 1, blocks)
    t = injections(sizes, FiniteFunction(2 * n, _interleaved(n)))
    wn = spec.target_sig.labeling(spec.fwd_word(labels) + spec.rev_word(labels))
    return spider(ff.identity(wn.source), t, wn, spec.target_sig)


def _interleaved_positions(spec: OpticSpec, labels: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Positions of the forward and of the reverse wires in ``⊗(A⃗ᵢ ⊗ A⃖ᵢ)``."""
    f, r = _sizes(spec, labels)
    n = len(labels)
    pairs = np.stack([f, r], axis=1).reshape(-1)
    sizes = FiniteFunction(ak.max_or(pairs, 0) + 1, pairs)
    fwd = injections(sizes, FiniteFunction(2 * n, 2 * ak.arange(n))).table
    rev = injections(sizes, FiniteFunction(2 * n, 2 * ak.arange(n) + 1)).table
    return fwd, rev


# ── Optic of a generator ─────────────────────────────────────────────────────

def _feed_residual(arrow: OpticArrow, n_fwd_out: int) -> Diagram:
    """Join the residual outputs of ``fwd`` to the residual inputs of ``rev``.

    The result has type ``A⃗ ⊗ A⃖ → B⃗ ⊗ B⃖``: reverse outputs sit on the source
    boundary and reverse inputs on the target boundary.
    """
    fwd, rev = arrow.fwd, arrow.rev
    n_m = len(arrow.residual)
    Wf, Wr = fwd.G.W, rev.G.W
    W = Wf + Wr
    q = ff.coequalizer(
        FiniteFunction(W, fwd.t.table[n_fwd_out:]),
        FiniteFunction(W, Wf + rev.s.table[:n_m]),
    )
    G = bm.coequalize_wires(bm.coproduct(fwd.G, rev.G), q)
    s = q.table[ak.concatenate([fwd.s.table, Wf + rev.t.table])]
    t = q.table[ak.concatenate([fwd.t.table[:n_fwd_out], Wf + rev.s.table[n_m:]])]
    return Diagram(FiniteFunction(q.target, s), FiniteFunction(q.target, t), G)


def optic_image(spec: OpticSpec, op: int) -> Diagram:
    """Image of generator *op*: ``interleave_A† ; (fwd with rev fed by its residual) ; interleave_B``."""
    if op not in spec.arrows:
        raise MissingOpticSpec(f"no optic given for {spec.source_sig.op_names[op]!r}")
    ((a, b),) = spec.source_sig.typings[op]
    body = _feed_residual(spec.arrows[op], len(spec.fwd_word(b)))
    return compose_all([dagger(interleave(a, spec)), body, interleave(b, spec)])


def _restrict(d: Diagram, sig: Signature, used: np.ndarray) -> tuple[Diagram, Signature]:
    """*d* relabeled over the sub-signature of the operations in *used* (sorted)."""
    sub = Signature(
        object_names=sig.object_names,
        op_names=tuple(sig.op_names[i] for i in used.tolist()),
        typings=tuple(sig.typings[i] for i in used.tolist()),
    )
    G = d.G
    G_sub = replace(
        G,
        pi=FiniteFunction(sub.port_bound, G.pi.table),
        po=FiniteFunction(sub.port_bound, G.po.table),
        xn=FiniteFunction(sub.n_ops, np.searchsorted(used, G.xn.table)),
    )
    return Diagram(d.s, d.t, G_sub), sub


def to_optic(spec: OpticSpec, d: Diagram) -> Diagram:
    """Apply the optic transformation to a well-formed diagram over ``spec.source_sig``.

    Each wire labeled ``o`` becomes wires ``o⃗ + o⃖`` and each operation its
    optic image; spiders map to spiders. The result is in general not
    monogamous; see :func:`adapt_ma`.

    Raises:
        NotWellFormed: If *d* is not well-formed.
        MissingOpticSpec: If *d* uses an operation without an optic.
    """
    sig = spec.source_sig
    resolve_typings(d, sig)
    used = np.unique(d.G.xn.table)
    missing = [sig.op_names[i] for i in used.tolist() if i not in spec.arrows]
    if missing:
        raise MissingOpticSpec(f"no optic given for {', '.join(missing)}")

    d_sub, sub = _restrict(d, sig, used)
    enc = FunctorEncoding.from_diagrams(
        sub,
        spec.target_sig,
        [spec.fwd_objects[o] + spec.rev_objects[o] for o in range(sig.n_objects)],
        [optic_image(spec, op) for op in used.tolist()],
    )
    out = apply_functor(enc, d_sub)
    logger.debug("to_optic: %d operations → %d", d.G.X, out.G.X)
    return out


# ── Monogamous acyclic adaptation ────────────────────────────────────────────

def _is_ma(d: Diagram) -> bool:
    return check_monogamous(d) and check_acyclic(d)


def adapt_ma(spec: OpticSpec, optic_d: Diagram, src_labels: Sequence[int], tgt_labels: Sequence[int]) -> Diagram:
    """Turn ``to_optic(d)`` into a monogamous acyclic diagram ``⊗A⃗ ⊗ ⊗B⃖ → ⊗B⃗ ⊗ ⊗A⃖``.

    The forward wires keep their sides; the reverse wires of the source and
    target boundaries trade places, which is composing with the inverse
    interleavings and bending the reverse wires with the Frobenius structure.

    Raises:
        NotAdaptable: If some forward or reverse map is not monogamous acyclic,
            or the boundaries do not fit the given labels.
    """
    for op, arrow in spec.arrows.items():
        if not (_is_ma(arrow.fwd) and _is_ma(arrow.rev)):
            raise NotAdaptable(f"optic of {spec.source_sig.op_names[op]!r} is not monogamous acyclic")

    src_labels, tgt_labels = list(src_labels), list(tgt_labels)
    fwd_a, rev_a = _interleaved_positions(spec, src_labels)
    fwd_b, rev_b = _interleaved_positions(spec, tgt_labels)
    if optic_d.s.source != len(fwd_a) + len(rev_a) or optic_d.t.source != len(fwd_b) + len(rev_b):
        raise NotAdaptable(f"optic boundary {optic_d.s.source} → {optic_d.t.source} does not fit the labels")

    W = optic_d.G.W
    s = ak.concatenate([optic_d.s.table[fwd_a], optic_d.t.table[rev_b]])
    t = ak.concatenate([optic_d.t.table[fwd_b], optic_d.s.table[rev_a]])
    adapted = Diagram(FiniteFunction(W, s), FiniteFunction(W, t), optic_d.G)
    if not _is_ma(adapted):
        raise NotAdaptable("adapted optic is not monogamous acyclic")
    return adapted


# ── Reverse derivatives ──────────────────────────────────────────────────────

def _gen(name: str) -> Gen:
    return Gen(ARITHMETIC_SIGNATURE.op_index(name))


def _perm(t: Sequence[int]) -> Spider:
    return Spider(tuple(range(len(t))), tuple(t), (R,) * len(t))


def _copy_then(name: str, arity: int) -> Term:
    """Lens forward map: copy every input, apply the operation to one copy."""
    if arity == 0:
        return _gen(name)
    copies = par_all([_gen("dup")] * arity)
    order = [2 * i for i in range(arity)] + [2 * i + 1 for i in range(arity)]
    return seq_all([copies, _perm(order), Par(_gen(name), Id((R,) * arity))])


def _reverse_terms() -> dict[str, Term]:
    rr = (R, R)
    return {
        "add": Par(Par(_gen("discard"), _gen("discard")), _gen("dup")),
        "mul": seq_all([Par(Id(rr), _gen("dup")), _perm([2, 1, 3, 0]), Par(_gen("mul"), _gen("mul"))]),
        "neg": Par(_gen("discard"), _gen("neg")),
        "dup": Par(_gen("discard"), _gen("add")),
        "zero": _gen("discard"),
        "one": _gen("discard"),
        "discard": Seq(_gen("discard"), _gen("zero")),
    }


def reverse_derivative_spec(sig: Signature = ARITHMETIC_SIGNATURE) -> OpticSpec:
    """Lens-shaped optics whose reverse maps are the reverse derivatives of the arithmetic generators.

    Every generator ``f : A → B`` gets forward map ``copy ; (f ⊗ id_A)`` with
    residual ``A``.

    Raises:
        UnsupportedGenerator: If *sig* has an object other than ``R`` or an
            operation with no known reverse derivative.
    """
    if sig.object_names != ARITHMETIC_SIGNATURE.object_names:
        raise UnsupportedGenerator(f"reverse derivatives need the single object R, got {list(sig.object_names)}")
    rev = _reverse_terms()
    arrows = {}
    for op, name in enumerate(sig.op_names):
        if name not in rev or sig.typings[op] != ARITHMETIC_SIGNATURE.typings[ARITHMETIC_SIGNATURE.op_index(name)]:
            raise UnsupportedGenerator(f"no reverse derivative for {name!r}")
        ((a, _),) = sig.typings[op]
        arrows[op] = OpticArrow(
            fwd=to_diagram_fast(_copy_then(name, len(a)), ARITHMETIC_SIGNATURE),
            rev=to_diagram_fast(rev[name], ARITHMETIC_SIGNATURE),
            residual=tuple(a),
        )
    return OpticSpec(sig, ARITHMETIC_SIGNATURE, ((R,),), ((R,),), arrows)


def rdiff(d: Diagram, sig: Signature = ARITHMETIC_SIGNATURE) -> Diagram:
    """Reverse derivative of a monogamous acyclic arithmetic circuit.

    The result has type ``R^|A| ⊗ R^|B| → R^|B| ⊗ R^|A|`` and computes
    ``(x, δ) ↦ (f(x), R[f](x, δ))``.

    Raises:
        UnsupportedGenerator: If *sig* is not (a part of) the arithmetic signature.
        NotAdaptable: If *d* is not monogamous acyclic.
    """
    spec = reverse_derivative_spec(sig)
    if not _is_ma(d):
        raise NotAdaptable("reverse derivatives are taken of monogamous acyclic diagrams")
    optic = to_optic(spec, d)
    return adapt_ma(spec, optic, d.source_type.table.tolist(), d.target_type.table.tolist())
