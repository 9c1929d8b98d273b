"""Argument parsers for every subcommand."""

import argparse

from strand import __version__
from strand.cli import handlers
from strand.services.bench_service import SHAPES
from strand.services.evaluation import INTERPRETATIONS


def _add_build(sub) -> None:
    p = sub.add_parser("build", help="elaborate a term into a diagram")
    p.add_argument("--sig", required=True, help="signature file")
    p.add_argument("--term", required=True, help="term file (one s-expression)")
    p.add_argument("--slow", action="store_true", help="fold compose/tensor instead of one-shot wiring")
    p.add_argument("--out", help="output JSON (default: stdout)")
    p.set_defaults(handler=handlers.build_cmd)


def _add_check(sub) -> None:
    p = sub.add_parser("check", help="report structural properties; exit 1 if any requested one fails")
    p.add_argument("diagram")
    p.add_argument("--monogamous", action="store_true")
    p.add_argument("--acyclic", action="store_true")
    p.add_argument("--well-formed", dest="well_formed", action="store_true")
    p.set_defaults(handler=handlers.check_cmd)


def _add_binary(sub, name: str, help_text: str, handler) -> None:
    p = sub.add_parser(name, help=help_text)
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--out")
    p.set_defaults(handler=handler)


def _add_dagger(sub) -> None:
    p = sub.add_parser("dagger", help="swap the two legs of a diagram")
    p.add_argument("diagram")
    p.add_argument("--out")
    p.set_defaults(handler=handlers.dagger_cmd)


def _add_map(sub) -> None:
    p = sub.add_parser("map", help="apply a functor file to a diagram")
    p.add_argument("diagram")
    p.add_argument("--functor", required=True, help="functor file")
    p.add_argument("--sig-in", dest="sig_in", required=True, help="source signature file")
    p.add_argument("--sig-out", dest="sig_out", required=True, help="target signature file")
    p.add_argument("--out")
    p.set_defaults(handler=handlers.map_cmd)


def _add_rdiff(sub) -> None:
    p = sub.add_parser("rdiff", help="reverse derivative of an arithmetic circuit")
    p.add_argument("--term", required=True, help="term over the built-in arithmetic signature")
    p.add_argument("--out")
    p.set_defaults(handler=handlers.rdiff_cmd)


def _add_eval(sub) -> None:
    p = sub.add_parser("eval", help="evaluate a monogamous acyclic arithmetic diagram")
    p.add_argument("diagram")
    p.add_argument("--inputs", default="", help="comma-separated input values")
    p.add_argument("--ring", choices=sorted(INTERPRETATIONS), default="float")
    p.set_defaults(handler=handlers.eval_cmd)


def _add_dot(sub) -> None:
    p = sub.add_parser("dot", help="export Graphviz DOT")
    p.add_argument("diagram")
    p.add_argument("--out")
    p.set_defaults(handler=handlers.dot_cmd)


def _add_bench(sub) -> None:
    p = sub.add_parser("bench", help="time the phases of one-shot elaboration")
    p.add_argument("--leaves", type=int, nargs="+", required=True, help="one or more term sizes")
    p.add_argument("--shape", choices=SHAPES, default="balanced")
    p.add_argument("--repeat", type=int, help="timed runs per phase (default: BENCH_REPEAT)")
    p.add_argument("--seed", type=int, help="seed for --shape random (default: BENCH_SEED)")
    p.add_argument("--report", help="also write an XLSX report to this path")
    p.set_defaults(handler=handlers.bench_cmd)


def _add_readback(sub) -> None:
    p = sub.add_parser("readback", help="print a term denoting a diagram")
    p.add_argument("diagram")
    p.add_argument("--pure", action="store_true", help="use only identities, twists and generators")
    p.set_defaults(handler=handlers.readback_cmd)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strand", description="String diagrams as structured cospans.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    _add_build(sub)
    _add_check(sub)
    _add_binary(sub, "compose", "sequential composition left ; right", handlers.compose_cmd)
    _add_binary(sub, "tensor", "parallel composition left ⊗ right", handlers.tensor_cmd)
    _add_dagger(sub)
    _add_map(sub)
    _add_rdiff(sub)
    _add_eval(sub)
    _add_dot(sub)
    _add_bench(sub)
    _add_readback(sub)
    return parser
