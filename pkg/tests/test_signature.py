"""Tests for signatures, labelings and label-preserving maps."""

import ast
from pathlib import Path

import pytest
from pydantic import ValidationError

import strand.models
from strand.services.finite_function import FiniteFunction
from strand.services.signature import (
    IndexOutOfRange,
    NotLabelPreserving,
    ShapeMismatch,
    Signature,
    WiresMorphism,
    check_label_preserving,
    typing_of,
)
from tests.factories import sig_from


def _make_sig() -> Signature:
    return sig_from("A B C", {"f": [("A", "B C")], "g": [("B", "A"), ("C", "A")], "u": [("", "A")]})


class TestSignature:
    """Tests for the signature model and its flat arrays."""

    def test_sizes(self):
        sig = _make_sig()
        assert (sig.n_objects, sig.n_ops, sig.n_typings) == (3, 3, 4)
        assert sig.port_bound == 2
        assert not sig.is_monomorphic()

    def test_flat_arrays_follow_typing_ids(self):
        sig = _make_sig()
        assert sig.arity.tolist() == [1, 1, 1, 0]
        assert sig.coarity.tolist() == [2, 1, 1, 1]
        assert sig.source_sorts.table.tolist() == [0, 1, 2]
        assert sig.target_sorts.table.tolist() == [1, 2, 0, 0, 0]

    def test_typing_ids(self):
        sig = _make_sig()
        assert sig.typing_id(0) == 0
        assert sig.typing_id(1, 1) == 2
        assert sig.typing_ids([2, 1, 1], [0, 1, 0]).tolist() == [3, 2, 1]

    def test_typing_of(self):
        sig = _make_sig()
        assert typing_of(sig, 0) == ((0,), (1, 2))
        assert typing_of(sig, 1, 1) == ((2,), (0,))

    def test_typing_of_bad_index(self):
        with pytest.raises(IndexOutOfRange):
            typing_of(_make_sig(), 1, 2)
        with pytest.raises(IndexOutOfRange):
            typing_of(_make_sig(), 5)

    def test_lookup_by_name(self):
        sig = _make_sig()
        assert sig.object_index("C") == 2
        assert sig.op_index("g") == 1
        assert sig.labeling_of_names(["C", "A"]).table.tolist() == [2, 0]
        assert sig.type_names(sig.labeling([1, 0])) == ["B", "A"]

    def test_labeling_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            _make_sig().labeling([3])

    def test_equality_ignores_cached_arrays(self):
        assert _make_sig() == _make_sig()
        assert hash(_make_sig()) == hash(_make_sig())

    def test_duplicate_object_names_rejected(self):
        with pytest.raises(ValidationError):
            Signature(object_names=("A", "A"))

    def test_sort_outside_objects_rejected(self):
        with pytest.raises(ValidationError):
            Signature(object_names=("A",), op_names=("f",), typings=((((0,), (1,)),),))

    def test_operation_without_typing_rejected(self):
        with pytest.raises(ValidationError):
            Signature(object_names=("A",), op_names=("f",), typings=((),))

    def test_empty_signature_port_bound(self):
        assert Signature().port_bound == 1


class TestLabelPreserving:
    """Tests for label-preserving maps of labeled wires."""

    def test_label_preserving(self):
        f = FiniteFunction(3, [2, 2, 0])
        assert check_label_preserving(f, FiniteFunction(2, [1, 1, 0]), FiniteFunction(2, [0, 1, 1]))

    def test_not_label_preserving(self):
        f = FiniteFunction(3, [0])
        assert not check_label_preserving(f, FiniteFunction(2, [1]), FiniteFunction(2, [0, 1, 1]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            check_label_preserving(FiniteFunction(3, [0]), FiniteFunction(2, [1, 1]), FiniteFunction(2, [0, 1, 1]))

    def test_wires_morphism_composes(self):
        a = FiniteFunction(2, [1, 0])
        b = FiniteFunction(2, [0, 1])
        c = FiniteFunction(2, [1, 0, 0])
        m1 = WiresMorphism(FiniteFunction(2, [1, 0]), a, b)
        m2 = WiresMorphism(FiniteFunction(3, [1, 0]), b, c)
        m = m1.then(m2)
        assert m.f == FiniteFunction(3, [0, 1])
        assert m.source_labels == a and m.target_labels == c

    def test_wires_morphism_rejects_relabeling(self):
        with pytest.raises(NotLabelPreserving):
            WiresMorphism(FiniteFunction(2, [0]), FiniteFunction(2, [1]), FiniteFunction(2, [0, 1]))


class TestLayering:
    """Models hold plain data; array-backed types live in services."""

    def test_models_do_not_import_services(self):
        for path in Path(strand.models.__file__).parent.glob("*.py"):
            tree = ast.parse(path.read_text(encoding="utf-8"))
            for node in ast.walk(tree):
                if isinstance(node, ast.ImportFrom) and node.module:
                    assert not node.module.startswith("strand.services"), path.name
                if isinstance(node, ast.Import):
                    assert not any(a.name.startswith("strand.services") for a in node.names), path.name
