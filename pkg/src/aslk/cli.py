"""Command-line front end: ``aslk check | translate | verify | metrics``.

Exit codes are stable and disjoint:

    0  success
    1  diagnostics, or the verifier rejected the specification
    2  I/O failure or bad usage
    3  verifier commands not configured or not installed
"""

from __future__ import annotations

import argparse
import enum
import os
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from aslk.diagnostics import AslError, Diagnostic, Severity
from aslk.metrics import MetricsRow, count_effective_lines, format_csv, format_table
from aslk.parser import load_spec
from aslk.resolver import ResolvedSpec, resolve_imports
from aslk.translator import assemble_module, output_name

PLACEHOLDER = "{file}"


class ExitCode(enum.IntEnum):
    OK = 0
    DIAGNOSTICS = 1
    IO = 2
    TOOL_MISSING = 3


@dataclass
class CliConfig:
    search_paths: list[Path] = field(default_factory=list)
    output_path: Path | None = None
    verifier_compile_cmd: str = ""
    verifier_prove_cmd: str = ""
    fail_on_warning: bool = False

    def __post_init__(self) -> None:
        for name in ("verifier_compile_cmd", "verifier_prove_cmd"):
            template = getattr(self, name)
            if template and template.count(PLACEHOLDER) != 1:
                raise ValueError(f"{name.replace('_', ' ')} must contain {PLACEHOLDER} exactly once: {template!r}")


def _report(diagnostics: Sequence[Diagnostic], err: TextIO) -> None:
    for d in diagnostics:
        print(d.format(), file=err)


def _failed(diagnostics: Sequence[Diagnostic], cfg: CliConfig) -> bool:
    if cfg.fail_on_warning:
        return bool(diagnostics)
    return any(d.severity is Severity.ERROR for d in diagnostics)


def build(file: str | os.PathLike, cfg: CliConfig) -> tuple[ResolvedSpec | None, list[Diagnostic]]:
    """Parse, check and resolve ``file``.  OSError propagates for I/O problems."""
    path = Path(file)
    result = load_spec(path)
    if result.document is None:
        return None, result.diagnostics
    try:
        spec = resolve_imports(result.document, cfg.search_paths, base_dir=path.parent)
    except AslError as exc:
        return None, result.diagnostics + exc.diagnostics
    return spec, result.diagnostics + list(spec.diagnostics)


def _build_or_report(file, cfg: CliConfig, err: TextIO) -> tuple[ResolvedSpec | None, int]:
    try:
        spec, diagnostics = build(file, cfg)
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error IO {file}: {exc}", file=err)
        return None, ExitCode.IO
    _report(diagnostics, err)
    if spec is None or _failed(diagnostics, cfg):
        return None, ExitCode.DIAGNOSTICS
    return spec, ExitCode.OK


def cmd_check(file, cfg: CliConfig, err: TextIO | None = None) -> int:
    _, status = _build_or_report(file, cfg, err or sys.stderr)
    return status


def _translate(file, cfg: CliConfig, out: TextIO, err: TextIO) -> tuple[Path | None, int]:
    spec, status = _build_or_report(file, cfg, err)
    if spec is None:
        return None, status
    text = assemble_module(spec).render()
    if cfg.output_path is not None and str(cfg.output_path) == "-":
        out.write(text)
        return None, ExitCode.OK
    target = cfg.output_path or Path(file).parent / output_name(spec.root.spec_id)
    try:
        Path(target).write_bytes(text.encode("utf-8"))
    except OSError as exc:
        print(f"error IO {target}: cannot write output: {exc}", file=err)
        return None, ExitCode.IO
    return Path(target), ExitCode.OK


def cmd_translate(file, cfg: CliConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    _, status = _translate(file, cfg, out or sys.stdout, err or sys.stderr)
    return status


def _run(template: str, k_file: Path) -> int:
    argv = [token.replace(PLACEHOLDER, str(k_file)) for token in shlex.split(template)]
    sys.stdout.flush()
    return subprocess.run(argv, check=False).returncode


def cmd_verify(file, cfg: CliConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Translate, then hand the ``.k`` file to the configured K commands.

    The compile command runs first; if it fails the prove command is skipped
    and the exit status is 1.  Otherwise the prove command's status is
    returned unchanged.
    """
    err = err or sys.stderr
    if not (cfg.verifier_compile_cmd or cfg.verifier_prove_cmd):
        print("error TOOL_MISSING verifier not configured (use --compile-cmd/--prove-cmd)", file=err)
        return ExitCode.TOOL_MISSING
    if cfg.output_path is not None and str(cfg.output_path) == "-":
        print("error USAGE verify needs a real output file, not '-'", file=err)
        return ExitCode.IO
    k_file, status = _translate(file, cfg, out or sys.stdout, err)
    if k_file is None:
        return status
    try:
        if cfg.verifier_compile_cmd and _run(cfg.verifier_compile_cmd, k_file) != 0:
            print(f"error VERIFY_COMPILE compile command failed for {k_file}", file=err)
            return ExitCode.DIAGNOSTICS
        if not cfg.verifier_prove_cmd:
            return ExitCode.OK
        return _run(cfg.verifier_prove_cmd, k_file)
    except FileNotFoundError as exc:
        print(f"error TOOL_MISSING verifier not found: {exc.filename or exc}", file=err)
        return ExitCode.TOOL_MISSING
    except PermissionError as exc:
        print(f"error TOOL_MISSING verifier is not executable: {exc.filename or exc}", file=err)
        return ExitCode.TOOL_MISSING


def cmd_metrics(
    pairs: Sequence[tuple[str, str]], cfg: CliConfig | None = None, *, as_csv: bool = False,
    out: TextIO | None = None, err: TextIO | None = None,
) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if not pairs:
        print("error EMPTY_INPUT no (asl, k) file pairs given", file=err)
        return ExitCode.DIAGNOSTICS
    rows = []
    for asl_file, k_file in pairs:
        try:
            asl_lines = count_effective_lines(Path(asl_file).read_text(encoding="utf-8"))
            k_lines = count_effective_lines(Path(k_file).read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError) as exc:
            print(f"error IO {exc}", file=err)
            return ExitCode.IO
        if k_lines == 0:
            print(f"error DIVISION_BY_ZERO {k_file} has no effective lines", file=err)
            return ExitCode.DIAGNOSTICS
        rows.append(MetricsRow(Path(asl_file).stem, asl_lines, k_lines))
    out.write(format_csv(rows) if as_csv else format_table(rows))
    return ExitCode.OK


def _search_paths(flags: Sequence[str]) -> list[Path]:
    paths = [Path(p) for p in flags]
    env = os.environ.get("ASLK_SEARCH_PATH", "")
    paths.extend(Path(p) for p in env.split(os.pathsep) if p)
    return paths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aslk", description="Compile ASL specifications to K.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="ASL specification (.yaml)")
    common.add_argument("--search-path", action="append", default=[], metavar="DIR",
                        help="extra directory searched for ASL imports (repeatable)")
    common.add_argument("--fail-on-warning", action="store_true", help="treat warnings as failures")

    sub.add_parser("check", parents=[common], help="parse, validate and resolve imports")
    translate = sub.add_parser("translate", parents=[common], help="emit the K module")
    translate.add_argument("-o", "--output", help="output file, or '-' for stdout")
    verify = sub.add_parser("verify", parents=[common], help="translate and run the K toolchain")
    verify.add_argument("-o", "--output", help="where to write the .k file")
    verify.add_argument("--compile-cmd", default=os.environ.get("ASLK_COMPILE_CMD", ""),
                        help="compile command template containing {file}")
    verify.add_argument("--prove-cmd", default=os.environ.get("ASLK_PROVE_CMD", ""),
                        help="prove command template containing {file}")

    metrics = sub.add_parser("metrics", help="compare effective line counts of ASL/K file pairs")
    metrics.add_argument("files", nargs="*", metavar="ASL K", help="alternating ASL and K files")
    metrics.add_argument("--csv", action="store_true", help="write comma-separated values")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "metrics":
        if len(args.files) % 2:
            print("error USAGE metrics takes files in (asl, k) pairs", file=sys.stderr)
            return ExitCode.IO
        pairs = list(zip(args.files[::2], args.files[1::2]))
        return cmd_metrics(pairs, as_csv=args.csv)

    try:
        cfg = CliConfig(
            search_paths=_search_paths(args.search_path),
            output_path=Path(args.output) if getattr(args, "output", None) else None,
            verifier_compile_cmd=getattr(args, "compile_cmd", ""),
            verifier_prove_cmd=getattr(args, "prove_cmd", ""),
            fail_on_warning=args.fail_on_warning,
        )
    except ValueError as exc:
        print(f"error USAGE {exc}", file=sys.stderr)
        return ExitCode.IO

    if args.command == "check":
        return cmd_check(args.file, cfg)
    if args.command == "translate":
        return cmd_translate(args.file, cfg)
    return cmd_verify(args.file, cfg)


if __name__ == "__main__":
    sys.exit(main())
