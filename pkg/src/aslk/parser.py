"""Parse ASL source text into a :class:`~aslk.model.SpecDocument`.

ASL rides on YAML, but the notation people actually write (and the one used
in the original examples) is looser than YAML proper: keywords are glued to
their values (``spec:EXAMPLE``) and list items are glued to their dash
(``-type:HTree``), with sibling keys aligned to the text after the dash.
:func:`normalize_surface` rewrites that notation into standard YAML without
moving any line, so YAML marks still point at the user's source lines.

The K expressions embedded in the document are not parsed; only the small
grammars ASL itself introduces (constructors, function signatures and rule
lines) are.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import yaml
from yaml.nodes import MappingNode, Node, ScalarNode, SequenceNode

from aslk.diagnostics import AslError, Diagnostic, Location, has_errors
from aslk.model import (
    Arrow,
    ConstructorExpr,
    FuncDecl,
    FuncKind,
    FunctionDef,
    FunctionSig,
    ImportRef,
    RewriteRule,
    SpecDocument,
    TypeDecl,
    TypeKind,
    check_document,
    is_identifier,
)

KEYWORDS = (
    "spec", "for", "imports", "types", "funcs",
    "type", "ctype", "is", "functions", "constructs",
    "func", "cfunc", "inputs", "contracts",
)  # fmt: skip

TOP_KEYS = ("spec", "for", "imports", "types", "funcs")
TYPE_KEYS = ("type", "ctype", "is", "functions", "constructs")
FUNC_KEYS = ("func", "cfunc", "is", "inputs", "contracts")

_OPENERS = {"(": ")", "{": "}"}
_CLOSERS = {")": "(", "}": "{"}

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"


@dataclass(frozen=True)
class SourceFile:
    name: str
    text: str


class ParseResult(NamedTuple):
    document: SpecDocument | None
    diagnostics: list[Diagnostic]


# ---------------------------------------------------------------------------
# Expression scanning


def scan_balanced(s: str) -> list[int]:
    """Check ``()`` and ``{}`` balance and return the bracket depth per character.

    Brackets themselves carry the depth of the context they open into, so a
    character is top-level exactly when its depth is 0.  Double-quoted string
    literals are skipped and reported one level deeper than their context.

    Raises:
        AslError: ``UNBALANCED_DELIMITER`` naming the offending index.
    """
    depths: list[int] = []
    stack: list[tuple[str, int]] = []
    in_string = False
    escaped = False
    for i, ch in enumerate(s):
        if in_string:
            depths.append(len(stack) + 1)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
            depths.append(len(stack) + 1)
        elif ch in _OPENERS:
            depths.append(len(stack))
            stack.append((ch, i))
        elif ch in _CLOSERS:
            if not stack or stack[-1][0] != _CLOSERS[ch]:
                raise AslError(Diagnostic.error("UNBALANCED_DELIMITER", f"unexpected {ch!r} at index {i}"))
            stack.pop()
            depths.append(len(stack))
        else:
            depths.append(len(stack))
    if in_string:
        raise AslError(Diagnostic.error("UNBALANCED_DELIMITER", "unterminated string literal"))
    if stack:
        ch, i = stack[-1]
        raise AslError(Diagnostic.error("UNBALANCED_DELIMITER", f"unclosed {ch!r} at index {i}"))
    return depths


def _top_level_separators(s: str, depths: list[int]) -> Iterator[tuple[int, Arrow]]:
    """Yield ``(index, arrow)`` for each top-level rewrite separator in ``s``.

    ``==``, ``<=``, ``>=``, ``!=`` and ``=/=`` are comparison operators, not
    separators.
    """
    i, n = 0, len(s)
    while i < n:
        ch = s[i]
        if depths[i] != 0:
            i += 1
        elif ch in "<>!" and s.startswith("=", i + 1):
            i += 2
        elif ch != "=":
            i += 1
        elif s.startswith("=>", i):
            yield i, Arrow.REWRITE
            i += 2
        elif s.startswith("==", i):
            i += 2
        elif s.startswith("=/=", i):
            i += 3
        else:
            yield i, Arrow.EQ
            i += 1


def parse_rule_line(s: str) -> RewriteRule:
    """Split ``lhs => rhs`` (or ``lhs = rhs``) at its top-level separator.

    ``=>`` wins over ``=`` when both appear.  A rule must contain exactly one
    top-level separator.

    Raises:
        AslError: ``RULE_SYNTAX`` or ``UNBALANCED_DELIMITER``.
    """
    depths = scan_balanced(s)
    seps = list(_top_level_separators(s, depths))
    if not seps:
        raise AslError(Diagnostic.error("RULE_SYNTAX", f"no top-level '=>' or '=' in rule {s!r}"))
    if len(seps) > 1:
        raise AslError(Diagnostic.error("RULE_SYNTAX", f"more than one top-level rewrite separator in rule {s!r}"))
    at, arrow = seps[0]
    lhs = s[:at].strip()
    rhs = s[at + len(arrow.value) :].strip()
    if not lhs or not rhs:
        raise AslError(Diagnostic.error("RULE_SYNTAX", f"rule {s!r} has an empty side"))
    return RewriteRule(lhs, rhs, arrow)


# ---------------------------------------------------------------------------
# Micro-grammars

_CTOR = re.compile(
    rf"\s*(?P<parent>{_IDENT})\s*"
    rf"(?:<\s*(?P<head>{_IDENT})\s*\((?P<params>[^()<>]*)\)\s*>)?\s*"
)
_CTOR_PARAM = re.compile(rf"\s*(?P<var>{_IDENT})\s*::\s*(?P<sort>{_IDENT})\s*")


def _ctor_error(s: str, why: str) -> AslError:
    return AslError(Diagnostic.error("CONSTRUCTOR_SYNTAX", f"bad constructor {s!r}: {why}"))


def parse_constructor(s: str) -> ConstructorExpr:
    """Parse ``Parent`` or ``Parent<head(v1::S1,...,vn::Sn)>``.

    Raises:
        AslError: ``CONSTRUCTOR_SYNTAX``.
    """
    if not s.strip():
        raise _ctor_error(s, "empty parent")
    if s.count("<") != s.count(">") or s.count("(") != s.count(")"):
        raise _ctor_error(s, "unbalanced delimiters")
    m = _CTOR.fullmatch(s)
    if m is None:
        if not re.match(rf"\s*{_IDENT}", s):
            raise _ctor_error(s, "missing parent name")
        raise _ctor_error(s, "expected Parent<head(var::Sort, ...)>")
    params: list[tuple[str, str]] = []
    if m["head"] is not None and m["params"].strip():
        for chunk in m["params"].split(","):
            pm = _CTOR_PARAM.fullmatch(chunk)
            if pm is None:
                raise _ctor_error(s, f"parameter {chunk.strip()!r} needs a 'var::Sort' annotation")
            params.append((pm["var"], pm["sort"]))
    names = [v for v, _ in params]
    if len(set(names)) != len(names):
        raise _ctor_error(s, "pattern variables must be distinct")
    return ConstructorExpr(m["parent"], m["head"] or "", tuple(params), s)


_SIG = re.compile(rf"\s*(?P<result>{_IDENT})\s+(?P<name>{_IDENT})\s*\((?P<params>[^()]*)\)\s*")


def parse_function_signature(s: str) -> FunctionSig:
    """Parse ``ResultSort name(Sort1, ..., SortN)``; N may be zero.

    Raises:
        AslError: ``SIGNATURE_SYNTAX``.
    """
    m = _SIG.fullmatch(s)
    if m is None:
        raise AslError(Diagnostic.error("SIGNATURE_SYNTAX", f"expected 'Result name(Sorts...)', got {s!r}"))
    raw_params = m["params"].strip()
    params = tuple(p.strip() for p in raw_params.split(",")) if raw_params else ()
    if not all(is_identifier(p) for p in params):
        raise AslError(Diagnostic.error("SIGNATURE_SYNTAX", f"parameter sorts must be identifiers in {s!r}"))
    return FunctionSig(m["result"], m["name"], params)


# ---------------------------------------------------------------------------
# Surface normalization

_KEYWORD_GLUED = re.compile(rf"^(\s*)({'|'.join(KEYWORDS)}):(?=\S)")
_BLOCK_SCALAR = re.compile(r":\s*[|>][-+0-9]*\s*(?:#.*)?$")


def normalize_surface(text: str) -> str:
    """Rewrite compact ASL notation into standard YAML, line for line.

    ``key:value`` becomes ``key: value`` for ASL keywords, and ``-item``
    becomes ``- item`` with everything nested under the item shifted one
    column right so that keys aligned after the dash stay siblings.  Text that
    is already standard YAML passes through unchanged.
    """
    out: list[str] = []
    dash_columns: list[int] = []
    block_indent: int | None = None
    for line in text.split("\n"):
        content = line.lstrip(" ")
        indent = len(line) - len(content)
        if block_indent is not None:
            if not content.strip() or indent > block_indent:
                out.append(" " * len(dash_columns) + line if content.strip() else line)
                continue
            block_indent = None
        if not content.strip() or content.startswith("#"):
            out.append(line)
            continue
        while dash_columns and dash_columns[-1] >= indent:
            dash_columns.pop()
        shift = len(dash_columns)
        prefix = ""
        if content.startswith("-") and len(content) > 1 and content[1] not in " \t-":
            prefix = "- "
            content = content[1:]
            dash_columns.append(indent)
        elif content.startswith("- "):
            prefix, content = "- ", content[2:]
        content = _KEYWORD_GLUED.sub(r"\1\2: ", content, count=1)
        if _BLOCK_SCALAR.search(content):
            block_indent = indent
        out.append(" " * (indent + shift) + prefix + content)
    return "\n".join(out)


# ---------------------------------------------------------------------------
# YAML walk


class _Walker:
    """Turns a composed YAML node tree into model objects, collecting diagnostics."""

    def __init__(self, file: str):
        self.file = file
        self.diagnostics: list[Diagnostic] = []

    def loc(self, path: str, node: Node | None) -> Location:
        line = node.start_mark.line + 1 if node is not None else 1
        return Location(self.file, path, line)

    def error(self, code: str, message: str, path: str, node: Node | None) -> None:
        self.diagnostics.append(Diagnostic.error(code, message, self.loc(path, node)))

    def warn(self, code: str, message: str, path: str, node: Node | None) -> None:
        self.diagnostics.append(Diagnostic.warning(code, message, self.loc(path, node)))

    def relay(self, exc: AslError, path: str, node: Node) -> None:
        self.diagnostics.extend(d.at(self.loc(path, node)) for d in exc.diagnostics)

    # -- node shapes ------------------------------------------------------

    def mapping(self, node: MappingNode, path: str, allowed: tuple[str, ...]) -> dict[str, tuple[Node, Node]]:
        entries: dict[str, tuple[Node, Node]] = {}
        for key, value in node.value:
            if not isinstance(key, ScalarNode):
                self.error("NODE_SHAPE", "mapping keys must be plain strings", path, key)
                continue
            if key.value in entries:
                self.error("DUPLICATE_KEY", f"key {key.value!r} appears more than once", f"{path}.{key.value}".lstrip("."), key)
                continue
            if key.value not in allowed:
                self.warn("UNKNOWN_NODE", f"unrecognized node {key.value!r} is ignored", f"{path}.{key.value}".lstrip("."), key)
                continue
            entries[key.value] = (key, value)
        return entries

    @staticmethod
    def is_null(node: Node) -> bool:
        return isinstance(node, ScalarNode) and node.tag == "tag:yaml.org,2002:null"

    def scalar(self, node: Node, path: str) -> str | None:
        if isinstance(node, ScalarNode):
            return "" if self.is_null(node) else node.value.strip()
        self.error("NODE_SHAPE", "expected a single value", path, node)
        return None

    def scalars(self, node: Node, path: str) -> list[tuple[str, str, Node]]:
        """A scalar or a sequence of scalars, as ``(text, path, node)`` triples."""
        if self.is_null(node):
            return []
        if isinstance(node, ScalarNode):
            return [(node.value.strip(), path, node)]
        if isinstance(node, SequenceNode):
            items = []
            for i, item in enumerate(node.value):
                text = self.scalar(item, f"{path}[{i}]")
                if text is not None:
                    items.append((text, f"{path}[{i}]", item))
            return items
        self.error("NODE_SHAPE", "expected a value or a list of values", path, node)
        return []

    def expressions(self, node: Node, path: str) -> tuple[str, ...]:
        exprs = []
        for text, p, n in self.scalars(node, path):
            if self.expression(text, p, n):
                exprs.append(text)
        return tuple(exprs)

    def expression(self, text: str, path: str, node: Node) -> bool:
        if not text:
            self.error("EMPTY_EXPRESSION", "expression is empty", path, node)
            return False
        try:
            depths = scan_balanced(text)
        except AslError as exc:
            self.relay(exc, path, node)
            return False
        if any(True for _ in _top_level_separators(text, depths)):
            self.error("EXPR_SYNTAX", f"'=' or '=>' may only separate the sides of a rule: {text!r}", path, node)
            return False
        return True

    def sequence(self, node: Node, path: str) -> list[Node]:
        if self.is_null(node):
            return []
        if isinstance(node, SequenceNode):
            return list(node.value)
        self.error("NODE_SHAPE", "expected a list", path, node)
        return []

    # -- ASL nodes --------------------------------------------------------

    def constructors(self, node: Node, path: str) -> tuple[ConstructorExpr, ...]:
        ctors = []
        for text, p, n in self.scalars(node, path):
            try:
                ctors.append(parse_constructor(text))
            except AslError as exc:
                self.relay(exc, p, n)
        return tuple(ctors)

    def kind_and_name(self, entries, path, node, kinds: tuple[str, str], missing_code: str):
        present = [k for k in kinds if k in entries]
        if not present:
            self.error(missing_code, f"entry needs one of {kinds[0]!r} or {kinds[1]!r}", path, node)
            return None, None
        if len(present) > 1:
            self.error(missing_code.replace("MISSING", "CONFLICT"), f"entry has both {kinds[0]!r} and {kinds[1]!r}", path, node)
            return None, None
        key = present[0]
        name = self.scalar(entries[key][1], f"{path}.{key}")
        if name is None:
            return None, None
        if not is_identifier(name):
            self.error("INVALID_IDENTIFIER", f"{name!r} is not a valid name", f"{path}.{key}", entries[key][1])
            return None, None
        return key, name

    def functions(self, node: Node, path: str) -> tuple[FunctionDef, ...]:
        if self.is_null(node):
            return ()
        pairs: list[tuple[Node, Node]] = []
        if isinstance(node, MappingNode):
            pairs = list(node.value)
        elif isinstance(node, SequenceNode):
            for i, item in enumerate(node.value):
                if isinstance(item, MappingNode):
                    pairs.extend(item.value)
                else:
                    self.error("NODE_SHAPE", "function entries map a signature to its rules", f"{path}[{i}]", item)
        else:
            self.error("NODE_SHAPE", "functions must map signatures to rules", path, node)
        defs = []
        seen: set[str] = set()
        for key, value in pairs:
            sig_text = self.scalar(key, path)
            if sig_text is None:
                continue
            fpath = f"{path}[{sig_text}]"
            if sig_text in seen:
                self.error("DUPLICATE_KEY", f"function {sig_text!r} is defined more than once", fpath, key)
                continue
            seen.add(sig_text)
            try:
                sig = parse_function_signature(sig_text)
            except AslError as exc:
                self.relay(exc, fpath, key)
                continue
            rules = []
            failed = False
            for text, p, n in self.scalars(value, fpath):
                try:
                    rules.append(parse_rule_line(text))
                except AslError as exc:
                    self.relay(exc, p, n)
                    failed = True
            if not rules and not failed:
                self.error("FUNCTION_NO_RULES", f"function {sig.name!r} has no rules", fpath, key)
            if rules:
                defs.append(FunctionDef(sig, tuple(rules)))
        return tuple(defs)

    def type_decl(self, node: Node, path: str) -> TypeDecl | None:
        if not isinstance(node, MappingNode):
            self.error("NODE_SHAPE", "a types entry must be a mapping", path, node)
            return None
        entries = self.mapping(node, path, TYPE_KEYS)
        key, name = self.kind_and_name(entries, path, node, ("type", "ctype"), "TYPE_KIND_MISSING")
        if name is None:
            return None
        return TypeDecl(
            name=name,
            kind=TypeKind(key),
            constructors=self.constructors(entries["is"][1], f"{path}.is") if "is" in entries else (),
            functions=self.functions(entries["functions"][1], f"{path}.functions") if "functions" in entries else (),
            constructs=self.expressions(entries["constructs"][1], f"{path}.constructs") if "constructs" in entries else (),
            line=node.start_mark.line + 1,
        )

    def func_decl(self, node: Node, path: str) -> FuncDecl | None:
        if not isinstance(node, MappingNode):
            self.error("NODE_SHAPE", "a funcs entry must be a mapping", path, node)
            return None
        entries = self.mapping(node, path, FUNC_KEYS)
        key, name = self.kind_and_name(entries, path, node, ("func", "cfunc"), "FUNC_KIND_MISSING")
        if name is None:
            return None
        inputs = None
        if "inputs" in entries:
            value = entries["inputs"][1]
            text = self.scalar(value, f"{path}.inputs")
            if text is not None and self.expression(text, f"{path}.inputs", value):
                inputs = text
        return FuncDecl(
            name=name,
            kind=FuncKind(key),
            constructors=self.constructors(entries["is"][1], f"{path}.is") if "is" in entries else (),
            inputs=inputs,
            contracts=self.expressions(entries["contracts"][1], f"{path}.contracts") if "contracts" in entries else (),
            line=node.start_mark.line + 1,
        )

    def document(self, root: Node | None) -> SpecDocument | None:
        if root is None:
            entries: dict[str, tuple[Node, Node]] = {}
        elif isinstance(root, MappingNode):
            entries = self.mapping(root, "", TOP_KEYS)
        else:
            self.error("NODE_SHAPE", "an ASL document must be a mapping of nodes", "", root)
            return None

        for essential, code in (("spec", "MISSING_SPEC"), ("for", "MISSING_FOR")):
            if essential not in entries:
                self.error(code, f"essential node {essential!r} is missing", essential, root)
        spec_id = self.scalar(entries["spec"][1], "spec") if "spec" in entries else None
        target = self.scalar(entries["for"][1], "for") if "for" in entries else None

        imports = []
        if "imports" in entries:
            for text, p, n in self.scalars(entries["imports"][1], "imports"):
                try:
                    imports.append(ImportRef.from_path(text))
                except ValueError as exc:
                    self.error("IMPORT_KIND", str(exc), p, n)

        types = []
        if "types" in entries:
            for i, item in enumerate(self.sequence(entries["types"][1], "types")):
                decl = self.type_decl(item, f"types[{i}]")
                if decl is not None:
                    types.append(decl)

        funcs = []
        if "funcs" in entries:
            for i, item in enumerate(self.sequence(entries["funcs"][1], "funcs")):
                decl = self.func_decl(item, f"funcs[{i}]")
                if decl is not None:
                    funcs.append(decl)

        if spec_id is None or target is None:
            return None
        return SpecDocument(spec_id, target, tuple(imports), tuple(types), tuple(funcs), self.file)


def parse_spec(src: SourceFile) -> ParseResult:
    """Parse and check one ASL file.

    ``document`` is None whenever ``diagnostics`` contains an error; warnings
    alone leave the document intact.
    """
    try:
        root = yaml.compose(normalize_surface(src.text), Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else 1
        problem = exc.problem or str(exc)
        return ParseResult(None, [Diagnostic.error("YAML_SYNTAX", f"invalid YAML: {problem}", Location(src.name, "", line))])
    except yaml.YAMLError as exc:
        return ParseResult(None, [Diagnostic.error("YAML_SYNTAX", f"invalid YAML: {exc}", Location(src.name, "", 1))])

    walker = _Walker(src.name)
    doc = walker.document(root)
    diagnostics = walker.diagnostics
    if doc is not None:
        diagnostics += check_document(doc)
    if has_errors(diagnostics):
        return ParseResult(None, diagnostics)
    return ParseResult(doc, diagnostics)


def load_spec(path) -> ParseResult:
    """Read ``path`` as UTF-8 and parse it.  I/O errors propagate as OSError."""
    from pathlib import Path

    p = Path(path)
    return parse_spec(SourceFile(p.name, p.read_text(encoding="utf-8")))


def dump_spec(doc: SpecDocument) -> str:
    """Serialize ``doc`` as canonical standard YAML that parses back to an equal document."""
    data: dict = {"spec": doc.spec_id, "for": doc.target_file}
    if doc.imports:
        data["imports"] = [i.path for i in doc.imports]
    if doc.types:
        data["types"] = []
        for t in doc.types:
            entry: dict = {t.kind.value: t.name}
            if t.constructors:
                entry["is"] = [c.raw for c in t.constructors]
            if t.functions:
                entry["functions"] = {str(f.signature): [str(r) for r in f.rules] for f in t.functions}
            if t.constructs:
                entry["constructs"] = list(t.constructs)
            data["types"].append(entry)
    if doc.funcs:
        data["funcs"] = []
        for f in doc.funcs:
            entry = {f.kind.value: f.name}
            if f.constructors:
                entry["is"] = [c.raw for c in f.constructors]
            if f.inputs is not None:
                entry["inputs"] = f.inputs
            if f.contracts:
                entry["contracts"] = list(f.contracts)
            data["funcs"].append(entry)
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True, width=float("inf"), default_flow_style=False)
