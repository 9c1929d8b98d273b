"""JSON interchange of diagrams and Graphviz DOT export."""

import json
import logging
from typing import Optional

from pydantic import ValidationError

from strand.errors import StrandError
from strand.models.schemas import (
    DiagramDocument,
    FiniteFunctionModel,
    GraphModel,
    OpModel,
    SignatureModel,
)
from strand.services.bipartite_multigraph import BipartiteMultigraph
from strand.services.diagram import Diagram
from strand.services.finite_function import FiniteFunction
from strand.services.signature import Signature

logger = logging.getLogger(__name__)


class SchemaError(StrandError):
    """Raised when a diagram document is malformed or inconsistent."""


# ── Conversions ──────────────────────────────────────────────────────────────

def signature_model(sig: Signature) -> SignatureModel:
    return SignatureModel(
        objects=list(sig.object_names),
        ops=[
            OpModel(name=name, typings=[(list(a), list(b)) for a, b in typings])
            for name, typings in zip(sig.op_names, sig.typings)
        ],
    )


def signature_from_model(model: SignatureModel) -> Signature:
    try:
        return Signature(
            object_names=tuple(model.objects),
            op_names=tuple(op.name for op in model.ops),
            typings=tuple(tuple((tuple(a), tuple(b)) for a, b in op.typings) for op in model.ops),
        )
    except ValidationError as exc:
        raise SchemaError(f"invalid signature: {exc.errors()[0]['msg']}") from exc


def _ff_model(f: FiniteFunction) -> FiniteFunctionModel:
    return FiniteFunctionModel.model_construct(target=f.target, table=f.table.tolist())


def _ff(model: FiniteFunctionModel) -> FiniteFunction:
    return FiniteFunction(model.target, model.table)


def diagram_document(d: Diagram, sig: Signature) -> DiagramDocument:
    G = d.G
    return DiagramDocument(
        sig=signature_model(sig),
        s=_ff_model(d.s),
        t=_ff_model(d.t),
        G=GraphModel.model_construct(W=G.W, **{name: _ff_model(f) for name, f in G.components().items()}),
    )


def diagram_json(d: Diagram, sig: Signature, indent: Optional[int] = None) -> str:
    """Serialize with sorted keys so equal diagrams give equal text."""
    doc = diagram_document(d, sig)
    return json.dumps(doc.model_dump(mode="json"), sort_keys=True, indent=indent)


def parse_diagram_json(text: str) -> tuple[Diagram, Signature]:
    """Read a diagram document.

    Raises:
        SchemaError: If the JSON does not follow the schema, a table entry is
            out of range, or the graph does not fit the signature.
    """
    try:
        doc = DiagramDocument.model_validate_json(text)
    except ValidationError as exc:
        err = exc.errors()[0]
        where = ".".join(str(p) for p in err["loc"])
        raise SchemaError(f"{where or 'document'}: {err['msg']}") from exc

    sig = signature_from_model(doc.sig)
    try:
        G = BipartiteMultigraph(**{name: _ff(getattr(doc.G, name)) for name in
                                   ("wi", "wo", "xi", "xo", "pi", "po", "wn", "xn")})
        d = Diagram(_ff(doc.s), _ff(doc.t), G)
    except StrandError as exc:
        raise SchemaError(str(exc)) from exc

    expected = (sig.n_objects, sig.n_ops, sig.port_bound)
    if G.signature_key() != expected:
        raise SchemaError(f"graph targets {G.signature_key()} do not match the signature {expected}")
    logger.debug("parsed diagram: W=%d Ei=%d Eo=%d X=%d", *G.shape)
    return d, sig


# ── DOT ──────────────────────────────────────────────────────────────────────

def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def diagram_dot(d: Diagram, sig: Signature, rankdir: str = "LR") -> str:
    """Graphviz rendering: wires as circles, operations as boxes, edges labeled by port.

    Boundary positions are drawn as small plain nodes joined to their wires
    by dashed lines.
    """
    G = d.G
    wn, xn = G.wn.table.tolist(), G.xn.table.tolist()
    lines = [
        "digraph diagram {",
        f"  rankdir={rankdir};",
        '  node [fontname="Helvetica"];',
        '  edge [fontname="Helvetica", fontsize=10];',
    ]
    lines += [f"  w{w} [shape=circle, label={_quote(sig.object_names[o])}];" for w, o in enumerate(wn)]
    lines += [f"  x{x} [shape=box, label={_quote(sig.op_names[op])}];" for x, op in enumerate(xn)]
    lines += [f"  s{i} [shape=plaintext, label={_quote(f'in {i}')}];" for i in range(d.s.source)]
    lines += [f"  t{j} [shape=plaintext, label={_quote(f'out {j}')}];" for j in range(d.t.source)]

    for w, x, p in zip(G.wi.table.tolist(), G.xi.table.tolist(), G.pi.table.tolist()):
        lines.append(f"  w{w} -> x{x} [label={_quote(str(p))}];")
    for w, x, p in zip(G.wo.table.tolist(), G.xo.table.tolist(), G.po.table.tolist()):
        lines.append(f"  x{x} -> w{w} [label={_quote(str(p))}];")
    lines += [f"  s{i} -> w{w} [style=dashed, arrowhead=none];" for i, w in enumerate(d.s.table.tolist())]
    lines += [f"  w{w} -> t{j} [style=dashed, arrowhead=none];" for j, w in enumerate(d.t.table.tolist())]
    lines.append("}")
    return "\n".join(lines) + "\n"
