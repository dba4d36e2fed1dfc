import shlex
import subprocess
import sys
from pathlib import Path

import pytest

from aslk.cli import CliConfig, ExitCode, cmd_check, cmd_metrics, cmd_translate, cmd_verify, main


@pytest.fixture
def example(tmp_path, fixtures) -> Path:
    path = tmp_path / "example.yaml"
    path.write_text((fixtures / "example.yaml").read_text(encoding="utf-8"), encoding="utf-8")
    (tmp_path / "c-verifier.k").write_text("module C-VERIFIER\nendmodule\n", encoding="utf-8")
    return path


def stub(tmp_path: Path, name: str, status: int) -> str:
    """A command template running a tiny script that logs its argument and exits with ``status``."""
    script = tmp_path / f"{name}.py"
    script.write_text(
        "import sys\n"
        f"open(sys.argv[0] + '.log', 'a').write(sys.argv[1] + '\\n')\n"
        f"print('{name} ran')\n"
        f"sys.exit({status})\n",
        encoding="utf-8",
    )
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(script))} {{file}}"


# -- check ------------------------------------------------------------------


def test_check_example(example, capsys):
    assert cmd_check(example, CliConfig()) == ExitCode.OK
    err = capsys.readouterr().err
    assert err.startswith("warning EXTERNAL_PARENT example.yaml:5 ")


def test_check_missing_for(write_spec, tmp_path, capsys):
    path = tmp_path / "t.yaml"
    path.write_text("spec: T\n", encoding="utf-8")
    assert cmd_check(path, CliConfig()) == ExitCode.DIAGNOSTICS
    lines = capsys.readouterr().err.splitlines()
    assert len(lines) == 1 and lines[0].startswith("error MISSING_FOR t.yaml:1 ")


def test_check_nonexistent(tmp_path):
    assert cmd_check(tmp_path / "nope.yaml", CliConfig()) == ExitCode.IO


def test_fail_on_warning(example):
    assert cmd_check(example, CliConfig(fail_on_warning=True)) == ExitCode.DIAGNOSTICS


def test_search_path_from_environment(tmp_path, write_spec, monkeypatch):
    write_spec("lib", "types:\n- type: L\n", directory=tmp_path / "libs")
    root = write_spec("main", "imports: lib.yaml\n", directory=tmp_path / "src")
    assert main(["check", str(root)]) == ExitCode.DIAGNOSTICS
    monkeypatch.setenv("ASLK_SEARCH_PATH", str(tmp_path / "libs"))
    assert main(["check", str(root)]) == ExitCode.OK
    monkeypatch.delenv("ASLK_SEARCH_PATH")
    assert main(["check", str(root), "--search-path", str(tmp_path / "libs")]) == ExitCode.OK


# -- translate --------------------------------------------------------------


def test_translate_writes_sibling(example, fixtures):
    assert cmd_translate(example, CliConfig()) == ExitCode.OK
    out = example.parent / "example.k"
    assert out.read_bytes() == (fixtures / "example.k").read_bytes()


def test_translate_is_idempotent(example):
    cmd_translate(example, CliConfig())
    first = (example.parent / "example.k").read_bytes()
    cmd_translate(example, CliConfig())
    assert (example.parent / "example.k").read_bytes() == first


def test_translate_minimal(write_spec):
    path = write_spec("mini")
    assert cmd_translate(path, CliConfig()) == ExitCode.OK
    assert (path.parent / "mini.k").read_text() == "// c verification target: t.c\nmodule MINI\nendmodule\n"


def test_translate_to_stdout(example, capsys, fixtures):
    assert main(["translate", str(example), "-o", "-"]) == ExitCode.OK
    assert capsys.readouterr().out == (fixtures / "example.k").read_text()


def test_translate_explicit_output(example, tmp_path):
    out = tmp_path / "out" / "spec.k"
    out.parent.mkdir()
    assert main(["translate", str(example), "-o", str(out)]) == ExitCode.OK
    assert out.read_text().startswith("// c verification target: bst.c\nmodule EXAMPLE\n")


def test_translate_unwritable(example, tmp_path):
    assert cmd_translate(example, CliConfig(output_path=tmp_path / "no" / "such" / "dir.k")) == ExitCode.IO


def test_translate_refuses_on_errors(write_spec, tmp_path):
    path = write_spec("bad", "types:\n- is: X\n")
    assert cmd_translate(path, CliConfig()) == ExitCode.DIAGNOSTICS
    assert not (tmp_path / "bad.k").exists()


# -- verify -----------------------------------------------------------------


def test_verify_not_configured(example, capsys):
    assert cmd_verify(example, CliConfig()) == ExitCode.TOOL_MISSING
    assert "verifier not configured" in capsys.readouterr().err


@pytest.mark.parametrize("status", [0, 1, 4])
def test_verify_passes_prove_status_through(example, tmp_path, status):
    cfg = CliConfig(verifier_compile_cmd=stub(tmp_path, "kompile", 0), verifier_prove_cmd=stub(tmp_path, "kprove", status))
    assert cmd_verify(example, cfg) == status
    k_file = str(example.parent / "example.k")
    assert (tmp_path / "kompile.py.log").read_text() == k_file + "\n"
    assert (tmp_path / "kprove.py.log").read_text() == k_file + "\n"


def test_verify_stops_when_compile_fails(example, tmp_path):
    cfg = CliConfig(verifier_compile_cmd=stub(tmp_path, "kompile", 2), verifier_prove_cmd=stub(tmp_path, "kprove", 0))
    assert cmd_verify(example, cfg) == ExitCode.DIAGNOSTICS
    assert not (tmp_path / "kprove.py.log").exists()


def test_verify_missing_executable(example):
    cfg = CliConfig(verifier_prove_cmd="definitely-not-a-k-tool-xyz {file}")
    assert cmd_verify(example, cfg) == ExitCode.TOOL_MISSING


def test_verify_template_needs_one_placeholder():
    with pytest.raises(ValueError):
        CliConfig(verifier_prove_cmd="kprove")
    with pytest.raises(ValueError):
        CliConfig(verifier_prove_cmd="kprove {file} {file}")


def test_verify_cli_bad_template(example):
    assert main(["verify", str(example), "--prove-cmd", "kprove"]) == ExitCode.IO


def test_verify_env_templates(example, tmp_path, monkeypatch):
    monkeypatch.setenv("ASLK_PROVE_CMD", stub(tmp_path, "kprove", 0))
    assert main(["verify", str(example)]) == ExitCode.OK


def test_verify_streams_tool_output(example, tmp_path, capfd):
    cfg = CliConfig(verifier_prove_cmd=stub(tmp_path, "kprove", 0))
    cmd_verify(example, cfg)
    assert "kprove ran" in capfd.readouterr().out


# -- metrics ----------------------------------------------------------------


def test_metrics_pairs(tmp_path, capsys):
    asl = tmp_path / "insert.yaml"
    k = tmp_path / "insert.k"
    asl.write_text("a\nb\n# comment\n")
    k.write_text("1\n2\n3\n4\n\n// c\n")
    assert main(["metrics", str(asl), str(k)]) == ExitCode.OK
    out = capsys.readouterr().out
    assert "insert" in out and "50.00" in out


def test_metrics_csv(tmp_path, capsys):
    f = tmp_path / "same.yaml"
    f.write_text("x\ny\n")
    assert main(["metrics", str(f), str(f), "--csv"]) == ExitCode.OK
    assert capsys.readouterr().out.splitlines()[1] == "same,2,2,0.00"


def test_metrics_empty(capsys):
    assert cmd_metrics([]) == ExitCode.DIAGNOSTICS
    assert "EMPTY_INPUT" in capsys.readouterr().err


def test_metrics_unreadable(tmp_path):
    assert cmd_metrics([(tmp_path / "a.yaml", tmp_path / "a.k")]) == ExitCode.IO


def test_metrics_odd_arguments(tmp_path):
    assert main(["metrics", str(tmp_path / "a.yaml")]) == ExitCode.IO


def test_metrics_empty_k_file(tmp_path):
    a, k = tmp_path / "a.yaml", tmp_path / "a.k"
    a.write_text("x\n")
    k.write_text("// only a comment\n")
    assert cmd_metrics([(a, k)]) == ExitCode.DIAGNOSTICS


def test_console_script(example):
    proc = subprocess.run([sys.executable, "-m", "aslk", "check", str(example)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "EXTERNAL_PARENT" in proc.stderr
