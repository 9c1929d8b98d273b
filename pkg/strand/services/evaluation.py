"""Numeric evaluation of monogamous acyclic diagrams over the built-in arithmetic signature."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import sympy

from strand.errors import StrandError
from strand.services.diagram import Diagram
from strand.services.signature import Signature
from strand.services.validation import PortTables, require_ma, topological_levels

logger = logging.getLogger(__name__)


class ArityMismatch(StrandError):
    """Raised when inputs or an operation's results do not match the expected arity."""


class MissingInterpretation(StrandError):
    """Raised when an interpretation has no function for an operation."""


# ── Arithmetic signature ─────────────────────────────────────────────────────

R = 0

ARITHMETIC_SIGNATURE = Signature(
    object_names=("R",),
    op_names=("add", "mul", "neg", "dup", "zero", "one", "discard"),
    typings=(
        (((R, R), (R,)),),
        (((R, R), (R,)),),
        (((R,), (R,)),),
        (((R,), (R, R)),),
        (((), (R,)),),
        (((), (R,)),),
        (((R,), ()),),
    ),
)

ARITHMETIC_SOURCE = """\
# real numbers with ring operations; copying and deleting are generators
object R
op add : R R -> R
op mul : R R -> R
op neg : R -> R
op dup : R -> R R
op zero : -> R
op one : -> R
op discard : R ->
"""


# ── Interpretations ──────────────────────────────────────────────────────────

OpFunction = Callable[..., tuple]


@dataclass(frozen=True)
class Interpretation:
    """Functions on values for each operation name, plus a coercion for inputs."""

    name: str
    ops: Mapping[str, OpFunction]
    coerce: Callable[[Any], Any]

    def apply(self, op_name: str, args: Sequence[Any]) -> tuple:
        try:
            fn = self.ops[op_name]
        except KeyError:
            raise MissingInterpretation(f"{self.name} interpretation has no operation {op_name!r}") from None
        return tuple(fn(*args))


def ring_interpretation(name: str, zero: Any, one: Any, coerce: Callable[[Any], Any]) -> Interpretation:
    """Interpret the arithmetic signature in a commutative ring."""
    return Interpretation(
        name=name,
        ops={
            "add": lambda x, y: (x + y,),
            "mul": lambda x, y: (x * y,),
            "neg": lambda x: (-x,),
            "dup": lambda x: (x, x),
            "zero": lambda: (zero,),
            "one": lambda: (one,),
            "discard": lambda x: (),
        },
        coerce=coerce,
    )


def float_interpretation() -> Interpretation:
    return ring_interpretation("float", 0.0, 1.0, float)


def fraction_interpretation() -> Interpretation:
    return ring_interpretation("fraction", Fraction(0), Fraction(1), Fraction)


def sympy_interpretation() -> Interpretation:
    """Values are sympy expressions; inputs may be symbols or numbers."""
    return ring_interpretation("sympy", sympy.Integer(0), sympy.Integer(1), sympy.sympify)


INTERPRETATIONS: dict[str, Callable[[], Interpretation]] = {
    "float": float_interpretation,
    "fraction": fraction_interpretation,
    "sympy": sympy_interpretation,
}


# ── Evaluation ───────────────────────────────────────────────────────────────

def evaluate_ma(d: Diagram, sig: Signature, interp: Interpretation, inputs: Sequence[Any]) -> list[Any]:
    """Run a monogamous acyclic diagram on *inputs*, one value per source position.

    Operations fire in topological order, each once all its input wires hold
    values. The result lists the values on the target positions.

    Raises:
        NotMonogamousAcyclic: If *d* is not monogamous and acyclic.
        ArityMismatch: If the number of inputs is wrong, or an operation returns the wrong number of values.
    """
    require_ma(d)
    if len(inputs) != d.s.source:
        raise ArityMismatch(f"diagram takes {d.s.source} inputs, got {len(inputs)}")

    G = d.G
    ports = PortTables(d)
    values: list[Any] = [None] * G.W
    for w, v in zip(d.s.table.tolist(), inputs):
        values[w] = interp.coerce(v)

    levels = topological_levels(G)[G.W:]
    order = np.argsort(levels, kind="stable").tolist()
    xn = G.xn.table.tolist()
    for x in order:
        name = sig.op_names[xn[x]]
        args = [values[w] for w in ports.inputs[x]]
        out = interp.apply(name, args)
        if len(out) != len(ports.outputs[x]):
            raise ArityMismatch(f"{name} returned {len(out)} values for {len(ports.outputs[x])} outputs")
        for w, v in zip(ports.outputs[x], out):
            values[w] = v

    logger.debug("evaluate_ma: %d operations under %s", G.X, interp.name)
    return [values[w] for w in d.t.table.tolist()]
