"""Build the verification environment: imports, registries and inheritance.

ASL imports are loaded depth-first and inlined into one pair of registries;
K imports are only recorded.  Each declaration's ``is`` constructors are then
walked transitively to collect what it inherits from its ancestors.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from aslk.diagnostics import AslError, Diagnostic, Location, has_errors
from aslk.model import ConstructorExpr, FuncDecl, FunctionDef, ImportKind, SpecDocument, TypeDecl
from aslk.parser import load_spec

# Sorts every K definition provides; a parent named here never needs an import.
BUILTIN_SORTS = frozenset({"Bool", "Int", "Float", "String", "Id", "K", "KItem", "KResult", "List", "Map", "Set", "Bag"})


class Relation(str, enum.Enum):
    NONE = "none"  # ancestor is external; nothing to reuse locally
    REUSE = "reuse"


@dataclass(frozen=True)
class EffectiveType:
    decl: TypeDecl
    inherited_functions: tuple[FunctionDef, ...] = ()
    inherited_constructs: tuple[str, ...] = ()
    parents: tuple[str, ...] = ()
    ancestors: tuple[str, ...] = ()
    external_parents: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return self.decl.name

    @property
    def all_functions(self) -> tuple[FunctionDef, ...]:
        return self.inherited_functions + self.decl.functions

    @property
    def all_constructs(self) -> tuple[str, ...]:
        return self.inherited_constructs + self.decl.constructs


@dataclass(frozen=True)
class EffectiveFunc:
    decl: FuncDecl
    inherited_contracts: tuple[str, ...] = ()
    relations: tuple[tuple[str, Relation], ...] = ()
    parents: tuple[str, ...] = ()
    ancestors: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return self.decl.name

    @property
    def relation(self) -> Relation:
        return Relation.REUSE if any(r is Relation.REUSE for _, r in self.relations) else Relation.NONE

    @property
    def all_contracts(self) -> tuple[str, ...]:
        return self.inherited_contracts + self.decl.contracts


@dataclass(frozen=True)
class ResolvedSpec:
    root: SpecDocument
    k_imports: tuple[str, ...] = ()
    type_registry: Mapping[str, EffectiveType] = field(default_factory=dict)
    func_registry: Mapping[str, EffectiveFunc] = field(default_factory=dict)
    inlined: tuple[str, ...] = ()  # ASL files merged in, import order, root excluded
    sources: tuple[Path, ...] = ()  # every ASL file loaded, root first
    diagnostics: tuple[Diagnostic, ...] = ()  # warnings only


def substitute_pattern(expr: str, ctor: ConstructorExpr, child_name: str) -> str:
    """Replace whole-identifier occurrences of ``ctor.parent`` in ``expr`` with ``child_name``."""
    return re.sub(rf"(?<![A-Za-z0-9_]){re.escape(ctor.parent)}(?![A-Za-z0-9_])", child_name, expr)


# ---------------------------------------------------------------------------
# Inheritance


@dataclass
class _Node:
    parents: list[str]
    externals: list[str]
    # (distance, item) pairs, nearest first; items at distance d come from an ancestor d steps up
    functions: list[tuple[int, FunctionDef]]
    exprs: list[tuple[int, str]]
    ancestors: list[tuple[int, str]]


def _nearest_first(pairs: Iterable[tuple[int, object]], key=lambda x: x, exclude=()) -> list[tuple[int, object]]:
    seen = {key(x) for x in exclude}
    out = []
    for d, item in sorted(pairs, key=lambda p: p[0]):
        k = key(item)
        if k not in seen:
            seen.add(k)
            out.append((d, item))
    return out


class _Hierarchy:
    """Memoized transitive walk over ``is`` constructors in one registry."""

    def __init__(
        self,
        registry: Mapping,
        own: Callable[[object], tuple[Sequence[FunctionDef], Sequence[str]]],
        what: str,
        allow_external: bool,
        diagnostics: list[Diagnostic] | None,
        origins: Mapping[str, str] | None,
    ):
        self.registry = registry
        self.own = own
        self.what = what
        self.allow_external = allow_external
        self.diagnostics = diagnostics
        self.origins = origins or {}
        self.cache: dict[str, _Node] = {}
        self.failed: dict[str, AslError] = {}

    def where(self, name: str) -> Location:
        decl = self.registry[name]
        return Location(self.origins.get(name, ""), f"{self.what}:{name}", decl.line)

    def resolve(self, name: str, stack: tuple[str, ...] = ()) -> _Node:
        if name in self.cache:
            return self.cache[name]
        if name in self.failed:
            raise self.failed[name]
        if name in stack:
            cycle = stack[stack.index(name) :] + (name,)
            error = AslError(
                Diagnostic.error("TYPE_CYCLE", f"{self.what} inheritance cycle: {' -> '.join(cycle)}", self.where(cycle[0]))
            )
            for member in cycle:
                self.failed[member] = error
            raise error
        decl = self.registry[name]
        own_functions, own_exprs = self.own(decl)
        parents, externals = [], []
        functions: list[tuple[int, FunctionDef]] = []
        exprs: list[tuple[int, str]] = []
        ancestors: list[tuple[int, str]] = []
        for ctor in decl.constructors:
            parents.append(ctor.parent)
            if ctor.parent not in self.registry:
                externals.append(ctor.parent)
                ancestors.append((1, ctor.parent))
                continue
            up = self.resolve(ctor.parent, stack + (name,))
            parent_functions, parent_exprs = self.own(self.registry[ctor.parent])
            ancestors.append((1, ctor.parent))
            ancestors.extend((d + 1, a) for d, a in up.ancestors)
            functions.extend((1, f) for f in parent_functions)
            functions.extend((d + 1, f) for d, f in up.functions)
            exprs.extend((1, substitute_pattern(e, ctor, name)) for e in parent_exprs)
            exprs.extend((d + 1, substitute_pattern(e, ctor, name)) for d, e in up.exprs)

        node = _Node(
            parents=parents,
            externals=externals,
            functions=_nearest_first(functions, key=lambda f: f.signature, exclude=own_functions),
            exprs=_nearest_first(exprs, exclude=own_exprs),
            ancestors=_nearest_first(ancestors),
        )
        for parent in externals:
            if self.allow_external or parent in BUILTIN_SORTS:
                self._report(Diagnostic.warning(
                    "EXTERNAL_PARENT",
                    f"{self.what} {name!r} inherits from {parent!r}, which no ASL file declares; "
                    "it must come from an imported K module",
                    self.where(name),
                ))
            else:
                raise AslError(Diagnostic.error(
                    "UNKNOWN_PARENT", f"{self.what} {name!r} inherits from undeclared {parent!r}", self.where(name)
                ))
        self.cache[name] = node
        return node

    def _report(self, diagnostic: Diagnostic) -> None:
        if self.diagnostics is not None:
            self.diagnostics.append(diagnostic)


def _type_items(decl: TypeDecl):
    return decl.functions, decl.constructs


def _func_items(decl: FuncDecl):
    return (), decl.contracts


def resolve_type(
    name: str,
    registry: Mapping[str, TypeDecl],
    *,
    allow_external: bool = True,
    diagnostics: list[Diagnostic] | None = None,
    origins: Mapping[str, str] | None = None,
    _hierarchy: _Hierarchy | None = None,
) -> EffectiveType:
    """Compute what ``name`` inherits through its ``is`` constructors.

    Parents missing from ``registry`` are external (supplied by a K module):
    a ``EXTERNAL_PARENT`` warning is appended to ``diagnostics``.  With
    ``allow_external=False`` such a parent is an ``UNKNOWN_PARENT`` error,
    except for K's builtin sorts.

    Raises:
        AslError: ``TYPE_CYCLE`` or ``UNKNOWN_PARENT``.
    """
    h = _hierarchy or _Hierarchy(registry, _type_items, "type", allow_external, diagnostics, origins)
    node = h.resolve(name)
    return EffectiveType(
        decl=registry[name],
        inherited_functions=tuple(f for _, f in node.functions),
        inherited_constructs=tuple(e for _, e in node.exprs),
        parents=tuple(dict.fromkeys(node.parents)),
        ancestors=tuple(a for _, a in node.ancestors),
        external_parents=tuple(dict.fromkeys(node.externals)),
    )


def resolve_func(
    name: str,
    registry: Mapping[str, FuncDecl],
    *,
    allow_external: bool = True,
    diagnostics: list[Diagnostic] | None = None,
    origins: Mapping[str, str] | None = None,
    _hierarchy: _Hierarchy | None = None,
) -> EffectiveFunc:
    """Function analogue of :func:`resolve_type`; collects ancestor contracts nearest-first."""
    h = _hierarchy or _Hierarchy(registry, _func_items, "function", allow_external, diagnostics, origins)
    node = h.resolve(name)
    ancestors = tuple(a for _, a in node.ancestors)
    return EffectiveFunc(
        decl=registry[name],
        inherited_contracts=tuple(e for _, e in node.exprs),
        relations=tuple((a, Relation.REUSE if a in registry else Relation.NONE) for a in ancestors),
        parents=tuple(dict.fromkeys(node.parents)),
        ancestors=ancestors,
    )


# ---------------------------------------------------------------------------
# Imports


class _Loader:
    def __init__(self, search_paths: Sequence[Path]):
        self.search_paths = list(search_paths)
        self.docs: dict[Path, SpecDocument] = {}
        self.order: list[Path] = []
        self.k_imports: list[str] = []
        self.diagnostics: list[Diagnostic] = []

    def locate(self, name: str, importer_dir: Path) -> Path | None:
        for base in [importer_dir, *self.search_paths]:
            candidate = base / name
            if candidate.is_file():
                return candidate.resolve()
        return None

    def visit(self, doc: SpecDocument, key: Path, stack: tuple[Path, ...]) -> None:
        stack = stack + (key,)
        for imp in doc.imports:
            if imp.kind is ImportKind.K and imp.path not in self.k_imports:
                self.k_imports.append(imp.path)
        for imp in doc.imports:
            if imp.kind is not ImportKind.ASL:
                continue
            where = Location(doc.source_name, "imports", 1)
            found = self.locate(imp.path, key.parent)
            if found is None:
                self.diagnostics.append(Diagnostic.error("IMPORT_NOT_FOUND", f"cannot find imported file {imp.path!r}", where))
                continue
            if found in stack:
                cycle = [p.name for p in stack[stack.index(found) :]] + [found.name]
                self.diagnostics.append(Diagnostic.error("IMPORT_CYCLE", f"import cycle: {' -> '.join(cycle)}", where))
                continue
            if found in self.docs:
                continue
            try:
                result = load_spec(found)
            except (OSError, UnicodeDecodeError) as exc:
                self.diagnostics.append(Diagnostic.error("IMPORT_UNREADABLE", f"cannot read {imp.path!r}: {exc}", where))
                continue
            self.diagnostics.extend(result.diagnostics)
            if result.document is None:
                continue
            self.docs[found] = result.document
            self.order.append(found)
            self.visit(result.document, found, stack)


def _merge(loader: _Loader, diagnostics: list[Diagnostic]):
    types: dict[str, TypeDecl] = {}
    funcs: dict[str, FuncDecl] = {}
    origins_t: dict[str, str] = {}
    origins_f: dict[str, str] = {}
    for path in loader.order:
        doc = loader.docs[path]
        for registry, origins, decls, what in (
            (types, origins_t, doc.types, "type"),
            (funcs, origins_f, doc.funcs, "function"),
        ):
            for decl in decls:
                if decl.name not in registry:
                    registry[decl.name] = decl
                    origins[decl.name] = doc.source_name
                elif registry[decl.name] != decl:
                    diagnostics.append(Diagnostic.error(
                        "NAME_CLASH",
                        f"{what} {decl.name!r} is declared differently in {origins[decl.name]} and {doc.source_name}",
                        Location(doc.source_name, f"{what}:{decl.name}", decl.line),
                    ))
    return types, funcs, origins_t, origins_f


def resolve_imports(
    root: SpecDocument,
    search_paths: Sequence[str | os.PathLike] = (),
    *,
    base_dir: str | os.PathLike | None = None,
) -> ResolvedSpec:
    """Load every ASL file reachable from ``root`` and resolve all declarations.

    ``base_dir`` is the directory ``root`` was read from (default: the current
    directory).  Relative imports are looked up there first, then in
    ``search_paths`` in order.  Each file is loaded once, however often it
    is imported.

    Raises:
        AslError: with every diagnostic found, if any is an error.
    """
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    root_key = (base / (root.source_name or "<root>.yaml")).resolve()
    loader = _Loader([Path(p) for p in search_paths])
    loader.docs[root_key] = root
    loader.order.append(root_key)
    loader.visit(root, root_key, ())

    diagnostics = loader.diagnostics
    if has_errors(diagnostics):
        raise AslError(diagnostics)
    types, funcs, origins_t, origins_f = _merge(loader, diagnostics)
    if has_errors(diagnostics):
        raise AslError(diagnostics)

    allow_external = bool(loader.k_imports)
    type_h = _Hierarchy(types, _type_items, "type", allow_external, diagnostics, origins_t)
    func_h = _Hierarchy(funcs, _func_items, "function", allow_external, diagnostics, origins_f)
    type_registry: dict[str, EffectiveType] = {}
    func_registry: dict[str, EffectiveFunc] = {}
    for name in types:
        try:
            type_registry[name] = resolve_type(name, types, _hierarchy=type_h)
        except AslError as exc:
            diagnostics.extend(d for d in exc.diagnostics if d not in diagnostics)
    for name in funcs:
        try:
            func_registry[name] = resolve_func(name, funcs, _hierarchy=func_h)
        except AslError as exc:
            diagnostics.extend(d for d in exc.diagnostics if d not in diagnostics)
    if has_errors(diagnostics):
        raise AslError(diagnostics)

    return ResolvedSpec(
        root=root,
        k_imports=tuple(loader.k_imports),
        type_registry=type_registry,
        func_registry=func_registry,
        inlined=tuple(loader.docs[p].source_name for p in loader.order[1:]),
        sources=tuple(loader.order),
        diagnostics=tuple(diagnostics),
    )
