"""ASL document model.

Every node of an ASL file has a frozen dataclass here.  Nothing in this module
knows about YAML or about K; the parser builds these objects and the
translator consumes them.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import PurePosixPath

from aslk.diagnostics import Diagnostic, Location

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_ASCII_UPPER = str.maketrans("abcdefghijklmnopqrstuvwxyz", "ABCDEFGHIJKLMNOPQRSTUVWXYZ")


def is_identifier(s: str) -> bool:
    return IDENTIFIER.fullmatch(s) is not None


def ascii_upper(s: str) -> str:
    return s.translate(_ASCII_UPPER)


def expected_spec_id(source_name: str) -> str:
    """Uppercased file stem; ``example.yaml`` maps to ``EXAMPLE``."""
    return ascii_upper(PurePosixPath(source_name.replace("\\", "/")).stem)


class ImportKind(str, enum.Enum):
    ASL = "asl"
    K = "k"


class TypeKind(str, enum.Enum):
    AUX = "type"
    C = "ctype"


class FuncKind(str, enum.Enum):
    AUX = "func"
    C = "cfunc"


class Arrow(str, enum.Enum):
    EQ = "="
    REWRITE = "=>"


IMPORT_SUFFIXES = {".yaml": ImportKind.ASL, ".k": ImportKind.K}


@dataclass(frozen=True)
class ImportRef:
    path: str
    kind: ImportKind

    @classmethod
    def from_path(cls, path: str) -> ImportRef:
        """Classify an import by extension.

        Raises:
            ValueError: if the extension is neither ``.yaml`` nor ``.k``.
        """
        suffix = PurePosixPath(path).suffix
        try:
            return cls(path, IMPORT_SUFFIXES[suffix])
        except KeyError:
            raise ValueError(f"import {path!r} must be a .yaml or .k file") from None

    @property
    def stem(self) -> str:
        return PurePosixPath(self.path).stem


@dataclass(frozen=True)
class ConstructorExpr:
    """A parsed ``is`` value: ``Parent`` or ``Parent<head(v1::S1,...)>``."""

    parent: str
    pattern_head: str = ""
    pattern_params: tuple[tuple[str, str], ...] = ()
    raw: str = ""

    @property
    def is_bare(self) -> bool:
        return not self.pattern_head

    @property
    def pattern(self) -> str:
        """The text between the outer angle brackets of ``raw``."""
        if self.is_bare:
            return ""
        return self.raw[self.raw.index("<") + 1 : self.raw.rindex(">")].strip()


@dataclass(frozen=True)
class FunctionSig:
    result_sort: str
    name: str
    param_sorts: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.result_sort} {self.name}({', '.join(self.param_sorts)})"


@dataclass(frozen=True)
class RewriteRule:
    lhs: str
    rhs: str
    original_arrow: Arrow = Arrow.REWRITE

    def __str__(self) -> str:
        return f"{self.lhs} {self.original_arrow.value} {self.rhs}"


@dataclass(frozen=True)
class FunctionDef:
    signature: FunctionSig
    rules: tuple[RewriteRule, ...]


@dataclass(frozen=True)
class TypeDecl:
    name: str
    kind: TypeKind = TypeKind.AUX
    constructors: tuple[ConstructorExpr, ...] = ()
    functions: tuple[FunctionDef, ...] = ()
    constructs: tuple[str, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FuncDecl:
    name: str
    kind: FuncKind = FuncKind.AUX
    constructors: tuple[ConstructorExpr, ...] = ()
    inputs: str | None = None
    contracts: tuple[str, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SpecDocument:
    spec_id: str
    target_file: str
    imports: tuple[ImportRef, ...] = ()
    types: tuple[TypeDecl, ...] = ()
    funcs: tuple[FuncDecl, ...] = ()
    source_name: str = ""

    def type_named(self, name: str) -> TypeDecl:
        return next(t for t in self.types if t.name == name)

    def func_named(self, name: str) -> FuncDecl:
        return next(f for f in self.funcs if f.name == name)


def check_document(doc: SpecDocument) -> list[Diagnostic]:
    """Semantic checks that need the whole document.

    Returns diagnostics in document order; several findings on the same node
    are ordered by code.
    """
    file = doc.source_name
    found: list[Diagnostic] = []

    expected = expected_spec_id(doc.source_name)
    if not doc.spec_id:
        found.append(Diagnostic.error("EMPTY_SPEC_ID", "spec identifier is empty", Location(file, "spec", 1)))
    elif doc.source_name and doc.spec_id != expected:
        found.append(
            Diagnostic.error(
                "SPEC_ID_MISMATCH",
                f"spec identifier {doc.spec_id!r} must be the uppercased file name {expected!r}",
                Location(file, "spec", 1),
            )
        )
    if not doc.target_file.strip():
        found.append(Diagnostic.error("EMPTY_TARGET", "verification target ('for') is empty", Location(file, "for", 1)))

    seen: set[str] = set()
    for i, t in enumerate(doc.types):
        here = Location(file, f"types[{i}]", t.line)
        node: list[Diagnostic] = []
        if t.name in seen:
            node.append(Diagnostic.error("DUPLICATE_TYPE", f"type {t.name!r} is declared more than once", here))
        seen.add(t.name)
        if any(c.parent == t.name for c in t.constructors):
            node.append(Diagnostic.error("TYPE_CYCLE", f"type inherits from itself: {t.name} -> {t.name}", here))
        found.extend(sorted(node, key=lambda d: d.code))

    seen.clear()
    for i, f in enumerate(doc.funcs):
        here = Location(file, f"funcs[{i}]", f.line)
        node = []
        if f.name in seen:
            node.append(Diagnostic.error("DUPLICATE_FUNC", f"function {f.name!r} is declared more than once", here))
        seen.add(f.name)
        if any(c.parent == f.name for c in f.constructors):
            node.append(Diagnostic.error("TYPE_CYCLE", f"function inherits from itself: {f.name} -> {f.name}", here))
        found.extend(sorted(node, key=lambda d: d.code))

    return found
