"""One handler per subcommand; each returns the process exit code."""

import argparse
import logging
from pathlib import Path
from typing import Optional

from strand.cli.exit_codes import OK, VALIDATION_FAILURE
from strand.config import get_settings
from strand.services import diagram as dg
from strand.services.bench_service import run_benchmark, scaling_steps
from strand.services.bipartite_multigraph import SignatureMismatch, WellFormednessError, check_well_formed
from strand.services.decomposition import readback, resolve_typings
from strand.services.diagram import Diagram
from strand.services.evaluation import ARITHMETIC_SIGNATURE, INTERPRETATIONS, evaluate_ma
from strand.services.functor_map import apply_functor
from strand.services.optics_rdiff import rdiff
from strand.services.parsing import parse_functor, parse_signature, parse_term, print_term
from strand.services.report_service import generate_bench_report
from strand.services.serialization import diagram_dot, diagram_json, parse_diagram_json
from strand.services.signature import Signature
from strand.services.term_builder import to_diagram_fast, to_diagram_slow
from strand.services.validation import check_acyclic, check_monogamous
from strand.utils import format_bench_rows, format_checks, format_outputs, format_scaling, parse_inputs

logger = logging.getLogger(__name__)


# ── I/O helpers ──────────────────────────────────────────────────────────────

def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, out: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.debug("wrote %s", out)
    else:
        print(text, end="")


def _load(path: str, validate: Optional[bool] = None) -> tuple[Diagram, Signature]:
    """Read a diagram file, checking well-formedness when configured to."""
    d, sig = parse_diagram_json(_read(path))
    if get_settings().VALIDATE_ON_LOAD if validate is None else validate:
        resolve_typings(d, sig)
    return d, sig


def _save(d: Diagram, sig: Signature, out: Optional[str]) -> None:
    _emit(diagram_json(d, sig, indent=get_settings().JSON_INDENT), out)


def _same_signature(a: Signature, b: Signature) -> Signature:
    if a != b:
        raise SignatureMismatch("diagrams are typed over different signatures")
    return a


# ── build / check ────────────────────────────────────────────────────────────

def build_cmd(args: argparse.Namespace) -> int:
    """Elaborate a term file over a signature file."""
    sig = parse_signature(_read(args.sig))
    term = parse_term(_read(args.term), sig)
    d = (to_diagram_slow if args.slow else to_diagram_fast)(term, sig)
    _save(d, sig, args.out)
    return OK


def check_cmd(args: argparse.Namespace) -> int:
    """Print each requested property; with no flag, all of them."""
    d, sig = _load(args.diagram, validate=False)
    wanted = [name for name in ("monogamous", "acyclic", "well_formed") if getattr(args, name)]
    wanted = wanted or ["monogamous", "acyclic", "well_formed"]

    results: dict[str, bool] = {}
    details: dict[str, str] = {}
    for name in wanted:
        if name == "monogamous":
            results[name] = check_monogamous(d)
        elif name == "acyclic":
            results[name] = check_acyclic(d)
        else:
            try:
                check_well_formed(d.G, sig)
                results[name] = True
            except (WellFormednessError, SignatureMismatch) as exc:
                results[name] = False
                details[name] = str(exc)
    print(format_checks(results, details))
    return OK if all(results.values()) else VALIDATION_FAILURE


# ── Combinators ──────────────────────────────────────────────────────────────

def compose_cmd(args: argparse.Namespace) -> int:
    d0, sig0 = _load(args.left)
    d1, sig1 = _load(args.right)
    sig = _same_signature(sig0, sig1)
    _save(dg.compose(d0, d1), sig, args.out)
    return OK


def tensor_cmd(args: argparse.Namespace) -> int:
    d0, sig0 = _load(args.left)
    d1, sig1 = _load(args.right)
    sig = _same_signature(sig0, sig1)
    _save(dg.tensor(d0, d1), sig, args.out)
    return OK


def dagger_cmd(args: argparse.Namespace) -> int:
    d, sig = _load(args.diagram)
    _save(dg.dagger(d), sig, args.out)
    return OK


def map_cmd(args: argparse.Namespace) -> int:
    """Apply a functor file, after checking the diagram is over its source signature."""
    sig_in = parse_signature(_read(args.sig_in))
    sig_out = parse_signature(_read(args.sig_out))
    encoding = parse_functor(_read(args.functor), sig_in, sig_out).encode()
    d, sig = _load(args.diagram)
    _same_signature(sig, sig_in)
    _save(apply_functor(encoding, d), sig_out, args.out)
    return OK


# ── Arithmetic ───────────────────────────────────────────────────────────────

def rdiff_cmd(args: argparse.Namespace) -> int:
    term = parse_term(_read(args.term), ARITHMETIC_SIGNATURE)
    d = to_diagram_fast(term, ARITHMETIC_SIGNATURE)
    _save(rdiff(d), ARITHMETIC_SIGNATURE, args.out)
    return OK


def eval_cmd(args: argparse.Namespace) -> int:
    d, sig = _load(args.diagram)
    interp = INTERPRETATIONS[args.ring]()
    outputs = evaluate_ma(d, sig, interp, parse_inputs(args.inputs))
    print(format_outputs(outputs))
    return OK


# ── Export / inspection ──────────────────────────────────────────────────────

def dot_cmd(args: argparse.Namespace) -> int:
    d, sig = _load(args.diagram, validate=False)
    _emit(diagram_dot(d, sig, rankdir=get_settings().DOT_RANKDIR), args.out)
    return OK


def readback_cmd(args: argparse.Namespace) -> int:
    d, sig = _load(args.diagram)
    print(print_term(readback(d, sig, pure=args.pure), sig))
    return OK


def bench_cmd(args: argparse.Namespace) -> int:
    """Print phase timings and optionally write them to an XLSX report."""
    cfg = get_settings()
    repeat = args.repeat if args.repeat is not None else cfg.BENCH_REPEAT
    seed = args.seed if args.seed is not None else cfg.BENCH_SEED
    rows = [row for n in args.leaves for row in run_benchmark(args.shape, n, repeat, seed)]
    title = f"{args.shape} terms, {', '.join(map(str, args.leaves))} leaves, median of {repeat}"
    print(format_bench_rows(rows, title=title))
    steps = scaling_steps(rows)
    if steps:
        print()
        print(format_scaling(steps))
    if args.report:
        Path(args.report).write_bytes(generate_bench_report(rows, title=title).getvalue())
        logger.info("wrote benchmark report to %s", args.report)
    return OK
