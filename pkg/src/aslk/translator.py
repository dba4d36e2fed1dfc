"""Emit K specification text from resolved ASL declarations.

Every emitted line comes from one of the fixed templates below, so output is
byte-for-byte reproducible.  A type block is written in four sections, in
this order: declaration, ``is`` material (constructor relations and
inherited functions), own functions, constructs.  Empty sections emit
nothing.

======  ===============================================================
T1      ``syntax Bool ::= "Name" "(" K ")" [function]``  (``, ctarget`` for ctype)
T2      ``rule Name(pattern) => Parent(pattern) [constructor]``
T3      ``syntax Result ::= "fname" "(" S1 "," S2 ")" [function]`` + one ``rule`` per rewrite
T4      ``rule NameConstructs => c1 andBool c2``
F1      ``syntax KItem ::= "name" [klabel(name)]``  (``, ctarget`` for cfunc)
F3      ``claim name => ?RESULT:K requires I ensures c1 andBool c2``
======  ===============================================================
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import PurePosixPath
from typing import Iterable, Sequence

from aslk.diagnostics import AslError, Diagnostic
from aslk.model import ConstructorExpr, FuncKind, FunctionDef, TypeKind, ascii_upper
from aslk.resolver import EffectiveFunc, EffectiveType, ResolvedSpec

SPLICE = " andBool "
INDENT = "  "


@dataclass(frozen=True)
class KText:
    lines: tuple[str, ...] = ()

    def __add__(self, other: KText) -> KText:
        return KText(self.lines + other.lines)

    def render(self) -> str:
        """Join lines with LF; the result ends with exactly one newline."""
        return "".join(line + "\n" for line in self.lines)

    __str__ = render


@dataclass(frozen=True)
class EmissionConfig:
    module_name: str
    target_language_tag: str = "c"
    indent: str = INDENT

    @classmethod
    def for_spec(cls, spec: ResolvedSpec, **kwargs) -> EmissionConfig:
        return cls(module_name=spec.root.spec_id, **kwargs)


def splice_contracts(cs: Sequence[str]) -> str:
    """Conjoin expressions with ``andBool``, verbatim and without added parentheses.

    Raises:
        AslError: ``EMPTY_CONTRACTS`` when ``cs`` is empty.
    """
    if not cs:
        raise AslError(Diagnostic.error("EMPTY_CONTRACTS", "nothing to splice"))
    return SPLICE.join(cs)


def _attrs(*attrs: str) -> str:
    return "[" + ", ".join(attrs) + "]"


def constructor_line(name: str, ctor: ConstructorExpr) -> str:
    if ctor.is_bare:
        return f"rule {name}(X:K) => {ctor.parent}(X:K) [constructor]"
    return f"rule {name}({ctor.pattern}) => {ctor.parent}({ctor.pattern}) [constructor]"


def function_lines(fn: FunctionDef) -> list[str]:
    sig = fn.signature
    sorts = ' "," '.join(sig.param_sorts)
    production = " ".join(filter(None, [f'"{sig.name}"', '"("', sorts, '")"']))
    lines = [f"syntax {sig.result_sort} ::= {production} [function]"]
    # rules are always emitted with K's rewrite arrow, whichever arrow the source used
    lines.extend(f"rule {rule.lhs} => {rule.rhs}" for rule in fn.rules)
    return lines


def translate_type(t: EffectiveType, cfg: EmissionConfig | None = None) -> KText:
    decl = t.decl
    flags = ["function"] + (["ctarget"] if decl.kind is TypeKind.C else [])
    lines = [f'syntax Bool ::= "{decl.name}" "(" K ")" {_attrs(*flags)}']
    lines.extend(constructor_line(decl.name, c) for c in decl.constructors)
    for fn in t.inherited_functions:
        lines.extend(function_lines(fn))
    for fn in decl.functions:
        lines.extend(function_lines(fn))
    if t.all_constructs:
        lines.append(f"rule {decl.name}Constructs => {splice_contracts(t.all_constructs)}")
    return KText(tuple(lines))


def translate_func(f: EffectiveFunc, cfg: EmissionConfig | None = None) -> KText:
    decl = f.decl
    flags = [f"klabel({decl.name})"] + (["ctarget"] if decl.kind is FuncKind.C else [])
    lines = [f'syntax KItem ::= "{decl.name}" {_attrs(*flags)}']
    lines.extend(constructor_line(decl.name, c) for c in decl.constructors)
    contracts = f.all_contracts
    if decl.inputs is not None or contracts:
        claim = f"claim {decl.name} => ?RESULT:K"
        if decl.inputs is not None:
            claim += f" requires {decl.inputs}"
        if contracts:
            claim += f" ensures {splice_contracts(contracts)}"
        lines.append(claim)
    return KText(tuple(lines))


def _indented(block: KText, indent: str) -> Iterable[str]:
    yield ""
    yield from (indent + line for line in block.lines)


def k_module_name(path: str) -> str:
    """``c-verifier.k`` is imported as module ``C-VERIFIER``."""
    return ascii_upper(PurePosixPath(path).stem)


def assemble_module(spec: ResolvedSpec, cfg: EmissionConfig | None = None) -> KText:
    """Assemble the complete K module for ``spec``.

    Types come first, then functions, each in declaration order (root file
    first, then inlined ASL imports).  Blocks are separated by blank lines.
    """
    cfg = cfg or EmissionConfig.for_spec(spec)
    if cfg.module_name != spec.root.spec_id:
        raise ValueError(f"module name {cfg.module_name!r} must equal the spec identifier {spec.root.spec_id!r}")
    lines = [
        f"// {cfg.target_language_tag} verification target: {spec.root.target_file}",
        f"module {cfg.module_name}",
    ]
    lines.extend(f"{cfg.indent}imports {k_module_name(p)}" for p in spec.k_imports)
    lines.extend(f"{cfg.indent}// inlined {k_module_name(p)} from {p}" for p in spec.inlined)
    for t in spec.type_registry.values():
        lines.extend(_indented(translate_type(t, cfg), cfg.indent))
    for f in spec.func_registry.values():
        lines.extend(_indented(translate_func(f, cfg), cfg.indent))
    lines.append("endmodule")
    return KText(tuple(lines))


def output_name(spec_id: str) -> str:
    return spec_id.lower() + ".k"
