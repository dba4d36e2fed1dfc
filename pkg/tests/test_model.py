from hypothesis import given, settings
from hypothesis import strategies as st

from aslk.model import (
    ConstructorExpr,
    FuncDecl,
    ImportKind,
    ImportRef,
    SpecDocument,
    TypeDecl,
    check_document,
    expected_spec_id,
)

import pytest


def doc(**kw) -> SpecDocument:
    base = dict(spec_id="EXAMPLE", target_file="bst.c", source_name="example.yaml")
    base.update(kw)
    return SpecDocument(**base)


def test_example_identifier_is_clean():
    assert check_document(doc()) == []


def test_spec_id_must_match_file_name():
    found = check_document(doc(source_name="other.yaml"))
    assert [d.code for d in found] == ["SPEC_ID_MISMATCH"]
    assert found[0].is_error


def test_duplicate_type():
    found = check_document(doc(types=(TypeDecl("HTree"), TypeDecl("HTree"))))
    assert [d.code for d in found] == ["DUPLICATE_TYPE"]


def test_duplicate_func():
    found = check_document(doc(funcs=(FuncDecl("insert"), FuncDecl("insert"))))
    assert [d.code for d in found] == ["DUPLICATE_FUNC"]


def test_empty_target():
    assert [d.code for d in check_document(doc(target_file=""))] == ["EMPTY_TARGET"]


def test_self_parent_is_a_cycle():
    t = TypeDecl("T", constructors=(ConstructorExpr("T", raw="T"),))
    f = FuncDecl("f", constructors=(ConstructorExpr("f", raw="f"),))
    found = check_document(doc(types=(t,), funcs=(f,)))
    assert [d.code for d in found] == ["TYPE_CYCLE", "TYPE_CYCLE"]


def test_findings_follow_document_order():
    t = TypeDecl("T", constructors=(ConstructorExpr("T", raw="T"),))
    found = check_document(doc(source_name="x.yaml", target_file=" ", types=(t, t)))
    assert [d.code for d in found] == ["SPEC_ID_MISMATCH", "EMPTY_TARGET", "TYPE_CYCLE", "DUPLICATE_TYPE", "TYPE_CYCLE"]


@pytest.mark.parametrize(
    "name, expected",
    [("example.yaml", "EXAMPLE"), ("my-spec_v2.yaml", "MY-SPEC_V2"), ("dir/bst.yaml", "BST"), ("ümlaut.yaml", "üMLAUT")],
)
def test_expected_spec_id_uppercases_ascii_only(name, expected):
    assert expected_spec_id(name) == expected


def test_import_kind_from_extension():
    assert ImportRef.from_path("c-verifier.k").kind is ImportKind.K
    assert ImportRef.from_path("lib/lists.yaml").kind is ImportKind.ASL
    with pytest.raises(ValueError):
        ImportRef.from_path("notes.txt")


def test_constructor_pattern_text():
    c = ConstructorExpr("BinaryTree", "htree", (("V", "Int"),), "BinaryTree<htree(V::Int)>")
    assert c.pattern == "htree(V::Int)"
    assert ConstructorExpr("Ordered", raw="Ordered").pattern == ""


ids = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True)


@settings(max_examples=200)
@given(st.lists(ids, max_size=4), st.lists(ids, max_size=4))
def test_check_document_is_pure(type_names, func_names):
    d = doc(types=tuple(TypeDecl(n) for n in type_names), funcs=tuple(FuncDecl(n) for n in func_names))
    assert check_document(d) == check_document(d)
    dup_types = len(type_names) - len(set(type_names))
    dup_funcs = len(func_names) - len(set(func_names))
    found = [x.code for x in check_document(d)]
    assert found.count("DUPLICATE_TYPE") == dup_types
    assert found.count("DUPLICATE_FUNC") == dup_funcs


@given(ids)
def test_empty_document_valid_iff_header_valid(stem):
    d = SpecDocument(spec_id=stem.upper(), target_file="a.c", source_name=f"{stem}.yaml")
    assert check_document(d) == []
