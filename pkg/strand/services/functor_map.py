"""Segmented finite functions and application of strict monoidal hypergraph functors."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from strand.errors import StrandError
from strand.services import array_kernel as ak
from strand.services import finite_function as ff
from strand.services.bipartite_multigraph import BipartiteMultigraph, check_well_formed
from strand.services.decomposition import assemble, decompose
from strand.services.diagram import Diagram, singleton, spider
from strand.services.finite_function import FiniteFunction, injections
from strand.services.signature import IndexOutOfRange, NotLabelPreserving, Signature, check_label_preserving

logger = logging.getLogger(__name__)

__all__ = [
    "SegmentedFiniteFunction",
    "FunctorEncoding",
    "injections",
    "sff_slice",
    "indexed_coproduct",
    "indexed_tensor",
    "map_half_spider",
    "map_spider",
    "map_tensoring",
    "apply_functor",
    "validate_encoding",
    "identity_encoding",
]


# ── Exceptions ───────────────────────────────────────────────────────────────

class FunctorError(StrandError):
    """Raised when a functor encoding cannot be built or applied."""


class SFFInvariant(FunctorError):
    """Raised when a segmented finite function has an out-of-range value."""


class EncodingMismatch(FunctorError):
    """Raised when an arrow image does not have the image type of its generator."""


class NotATensoring(FunctorError):
    """Raised when a diagram is not a plain tensor of generators."""


class PolymorphicSignature(FunctorError):
    """Raised when a functor is defined on a signature with polymorphic generators."""


# ── Segmented finite functions ───────────────────────────────────────────────

@dataclass(frozen=True)
class SegmentedFiniteFunction:
    """A family of finite functions stored as three flat arrays.

    Segment ``i`` has ``sources(i)`` entries, all below ``targets(i)``, stored
    contiguously in ``values``.
    """

    sources: FiniteFunction
    targets: FiniteFunction
    values: FiniteFunction

    def __post_init__(self) -> None:
        if self.sources.source != self.targets.source:
            raise SFFInvariant(f"{self.sources.source} source sizes but {self.targets.source} target sizes")
        if self.values.source != ak.sum_(self.sources.table):
            raise SFFInvariant(f"values have {self.values.source} entries, sources sum to {ak.sum_(self.sources.table)}")
        bound = ak.repeat(self.targets.table, self.sources.table)
        bad = np.flatnonzero(self.values.table >= bound)
        if len(bad):
            seg = int(np.searchsorted(np.cumsum(self.sources.table), bad[0], side="right"))
            raise SFFInvariant(f"segment {seg} has a value not below its target {int(self.targets.table[seg])}")

    @property
    def n_segments(self) -> int:
        return self.sources.source

    @property
    def offsets(self) -> np.ndarray:
        return ak.prefix_sum(self.sources.table)

    @classmethod
    def from_functions(cls, fs: Sequence[FiniteFunction]) -> "SegmentedFiniteFunction":
        sources = ak.as_array([f.source for f in fs])
        targets = ak.as_array([f.target for f in fs])
        values = ak.concatenate([f.table for f in fs])
        return cls(
            sources=FiniteFunction(ak.max_or(sources, 0) + 1, sources),
            targets=FiniteFunction(ak.max_or(targets, 0) + 1, targets),
            values=FiniteFunction(max(ak.max_or(targets, 1), 1), values),
        )


def sff_slice(sff: SegmentedFiniteFunction, i: int) -> FiniteFunction:
    """Segment *i* as a standalone function."""
    if not 0 <= i < sff.n_segments:
        raise IndexOutOfRange(f"segment {i} of {sff.n_segments}")
    start = int(sff.offsets[i])
    stop = start + int(sff.sources.table[i])
    return FiniteFunction(int(sff.targets.table[i]), sff.values.table[start:stop])


def indexed_coproduct(sff: SegmentedFiniteFunction, x: FiniteFunction, target: Optional[int] = None) -> FiniteFunction:
    """Copairing of the segments selected by *x*, which must share a target.

    Args:
        sff: The family of functions.
        x: Selector, ``x.table[i]`` is the segment placed i-th.
        target: Common target to use when *x* selects nothing.

    Raises:
        TargetMismatch: If the selected segments have different targets.
    """
    targets = sff.targets.table[x.table]
    if len(targets) and np.any(targets != targets[0]):
        raise ff.TargetMismatch(f"indexed coproduct over targets {np.unique(targets).tolist()}")
    common = int(targets[0]) if len(targets) else (target or 0)
    table = sff.values.table[injections(sff.sources, x).table]
    return FiniteFunction(common, table)


def indexed_tensor(sff: SegmentedFiniteFunction, x: FiniteFunction) -> FiniteFunction:
    """Tensor of the segments selected by *x*: each segment is shifted past the targets before it."""
    sizes = sff.sources.table[x.table]
    targets = sff.targets.table[x.table]
    table = sff.values.table[injections(sff.sources, x).table] + ak.repeat(ak.prefix_sum(targets), sizes)
    return FiniteFunction(ak.sum_(targets), table)


# ── Encodings ────────────────────────────────────────────────────────────────

ARROW_COMPONENTS = ("s", "t", "wi", "wo", "xi", "xo", "pi", "po", "wn", "xn")
_TENSORED = ("s", "t", "wi", "wo", "xi", "xo")
_COPAIRED = ("pi", "po", "wn", "xn")


def _components(d: Diagram) -> dict[str, FiniteFunction]:
    return {"s": d.s, "t": d.t, **d.G.components()}


@dataclass(frozen=True)
class FunctorEncoding:
    """A functor ``Σ → Ω`` given by object images and one image diagram per generator.

    ``object_map`` segment ``o`` lists the Ω-objects of ``F(o)``. Each entry of
    ``arrows`` stacks one component (``s``, ``t``, or a graph map) of every
    generator's image diagram.
    """

    source_sig: Signature
    target_sig: Signature
    object_map: SegmentedFiniteFunction
    arrows: dict[str, SegmentedFiniteFunction]

    @classmethod
    def from_diagrams(
        cls,
        source_sig: Signature,
        target_sig: Signature,
        object_images: Sequence[Sequence[int]],
        arrow_diagrams: Sequence[Diagram],
    ) -> "FunctorEncoding":
        """Encode a functor from its images, then check it with :func:`validate_encoding`."""
        obj = SegmentedFiniteFunction.from_functions(
            [FiniteFunction(target_sig.n_objects, list(img)) for img in object_images]
        )
        comps = [_components(d) for d in arrow_diagrams]
        arrows = {name: SegmentedFiniteFunction.from_functions([c[name] for c in comps]) for name in ARROW_COMPONENTS}
        enc = cls(source_sig, target_sig, obj, arrows)
        validate_encoding(enc, source_sig, target_sig)
        return enc

    def object_image(self, o: int) -> list[int]:
        return sff_slice(self.object_map, o).table.tolist()

    def arrow_diagram(self, op: int) -> Diagram:
        """Reassemble the image diagram of generator *op*."""
        c = {name: sff_slice(self.arrows[name], op) for name in ARROW_COMPONENTS}
        sig = self.target_sig
        c["pi"] = FiniteFunction(sig.port_bound, c["pi"].table)
        c["po"] = FiniteFunction(sig.port_bound, c["po"].table)
        c["wn"] = FiniteFunction(sig.n_objects, c["wn"].table)
        c["xn"] = FiniteFunction(sig.n_ops, c["xn"].table)
        G = BipartiteMultigraph(**{k: c[k] for k in ("wi", "wo", "xi", "xo", "pi", "po", "wn", "xn")})
        return Diagram(c["s"], c["t"], G)

    def map_labels(self, labels: FiniteFunction) -> FiniteFunction:
        """``F`` on a word of objects."""
        return FiniteFunction(
            self.target_sig.n_objects,
            self.object_map.values.table[injections(self.object_map.sources, labels).table],
        )


def identity_encoding(sig: Signature) -> FunctorEncoding:
    """The identity functor on *sig* (monomorphic signatures only)."""
    if not sig.is_monomorphic():
        raise PolymorphicSignature("identity encoding of a polymorphic signature")
    images = [[o] for o in range(sig.n_objects)]
    arrows = [singleton(sig.labeling(a), sig.labeling(b), op, sig) for op, ((a, b),) in enumerate(sig.typings)]
    return FunctorEncoding.from_diagrams(sig, sig, images, arrows)


# ── Validation ───────────────────────────────────────────────────────────────

def validate_encoding(enc: FunctorEncoding, sig_in: Signature, sig_out: Signature) -> None:
    """Check that *enc* encodes a functor ``sig_in → sig_out``.

    Raises:
        PolymorphicSignature: If some generator of *sig_in* has several typings.
        SFFInvariant: If the segment counts do not match the signatures.
        EncodingMismatch: Listing every generator whose image is ill-formed or mistyped.
    """
    if not sig_in.is_monomorphic():
        raise PolymorphicSignature("functors are only encoded for signatures with one typing per generator")
    if enc.object_map.n_segments != sig_in.n_objects:
        raise SFFInvariant(f"object map has {enc.object_map.n_segments} segments, signature has {sig_in.n_objects} objects")
    if len(enc.object_map.values) and enc.object_map.values.table.max() >= sig_out.n_objects:
        raise SFFInvariant("object map refers to an unknown target object")
    for name in ARROW_COMPONENTS:
        if enc.arrows[name].n_segments != sig_in.n_ops:
            raise SFFInvariant(f"arrow component {name} has {enc.arrows[name].n_segments} segments, "
                               f"signature has {sig_in.n_ops} operations")

    problems = []
    for op, ((a, b),) in enumerate(sig_in.typings):
        name = sig_in.op_names[op]
        try:
            d = enc.arrow_diagram(op)
            check_well_formed(d.G, sig_out)
        except (StrandError, ValueError) as exc:
            problems.append(f"{name}: {exc}")
            continue
        want_a = enc.map_labels(sig_in.labeling(a))
        want_b = enc.map_labels(sig_in.labeling(b))
        if d.source_type != want_a or d.target_type != want_b:
            problems.append(
                f"{name}: image has type {sig_out.type_names(d.source_type)} → {sig_out.type_names(d.target_type)}, "
                f"expected {sig_out.type_names(want_a)} → {sig_out.type_names(want_b)}"
            )
    if problems:
        raise EncodingMismatch("; ".join(problems))


# ── Application ──────────────────────────────────────────────────────────────

def map_half_spider(
    enc: FunctorEncoding, f: FiniteFunction, src_labels: FiniteFunction, tgt_labels: FiniteFunction
) -> tuple[FiniteFunction, FiniteFunction, FiniteFunction]:
    """Image of the half-spider of a label-preserving map.

    Returns:
        ``(f', src_labels', tgt_labels')`` where *f'* sends each image wire of
        a source wire ``a`` to the matching image wire of ``f(a)``.

    Raises:
        NotLabelPreserving: If ``f ; tgt_labels != src_labels``.
    """
    if not check_label_preserving(f, src_labels, tgt_labels):
        raise NotLabelPreserving(f"{f!r} does not preserve labels")
    sizes = enc.object_map.sources
    tgt_new = enc.map_labels(tgt_labels)
    wire_sizes = FiniteFunction(sizes.target, sizes.table[tgt_labels.table])
    f_new = injections(wire_sizes, f)
    return f_new, ff.compose(f_new, tgt_new), tgt_new


def map_spider(enc: FunctorEncoding, d: Diagram) -> Diagram:
    """Image of a spider: both legs are mapped like half-spiders over the same wires."""
    if not d.is_spider:
        raise NotATensoring("map_spider on a diagram with operations")
    wn = d.G.wn
    s_new, _, wn_new = map_half_spider(enc, d.s, ff.compose(d.s, wn), wn)
    t_new, _, _ = map_half_spider(enc, d.t, ff.compose(d.t, wn), wn)
    return spider(s_new, t_new, wn_new, enc.target_sig)


def _is_tensoring(d: Diagram) -> bool:
    G = d.G
    n_in, n_out = G.Ei, G.Eo
    return (
        G.W == n_in + n_out
        and d.s == ff.inj0(n_in, n_out) and d.t == ff.inj1(n_in, n_out)
        and G.wi == d.s and G.wo == d.t
        and ak.all_(np.diff(G.xi.table) >= 0) and ak.all_(np.diff(G.xo.table) >= 0)
    )


def map_tensoring(enc: FunctorEncoding, d: Diagram) -> Diagram:
    """Image of a tensor of generators, assembled segment-wise from the encoding.

    Raises:
        NotATensoring: If *d* is not laid out as ``(inj0, inj1, G)`` with operations in order.
    """
    if not _is_tensoring(d):
        raise NotATensoring("diagram is not a tensoring of generators")
    xn = d.G.xn
    sig = enc.target_sig
    c = {name: indexed_tensor(enc.arrows[name], xn) for name in _TENSORED}
    defaults = {"pi": sig.port_bound, "po": sig.port_bound, "wn": sig.n_objects, "xn": sig.n_ops}
    for name in _COPAIRED:
        c[name] = indexed_coproduct(enc.arrows[name], xn, defaults[name])
    # segments carry their own (possibly smaller) targets; widen to the signature's
    for name, bound in defaults.items():
        c[name] = FiniteFunction(bound, c[name].table)
    G = BipartiteMultigraph(**{k: c[k] for k in ("wi", "wo", "xi", "xo", "pi", "po", "wn", "xn")})
    return Diagram(c["s"], c["t"], G)


def apply_functor(enc: FunctorEncoding, d: Diagram) -> Diagram:
    """Apply the encoded functor to a well-formed diagram over its source signature.

    The Frobenius decomposition of *d* is mapped piece by piece and composed again.

    Raises:
        NotWellFormed: If *d* is not well-formed over ``enc.source_sig``.
    """
    fd = decompose(d, enc.source_sig)
    pieces = [map_spider(enc, s) for s in fd.spiders(enc.source_sig)]
    out = assemble(pieces, map_tensoring(enc, fd.tensoring))
    logger.debug("apply_functor: X %d → %d, W %d → %d", d.G.X, out.G.X, d.G.W, out.G.W)
    return out
