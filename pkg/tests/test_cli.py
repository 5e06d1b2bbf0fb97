import json
import subprocess
import sys

import pytest

from legatlas import cli
from legatlas import moves as mv
from legatlas.grid import decode, encode

UNKNOT = "2;x=2,1;o=1,2"
TREFOIL = "5;x=1,2,3,4,5;o=3,4,5,1,2"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_invariants(capsys):
    code, out, _ = run(capsys, "invariants", UNKNOT, TREFOIL)
    assert code == 0
    assert out.splitlines() == ["tb=-1 r=0 sl=-1 components=1", "tb=1 r=0 sl=1 components=1"]


def test_validate_ok_and_bad(capsys, tmp_path):
    f = tmp_path / "g.txt"
    f.write_text(f"# comment\n{UNKNOT}\n2;x=2,1;o=1,\n")
    code, out, err = run(capsys, "validate", str(f))
    assert code == 1
    assert out.strip() == f"ok {UNKNOT} components=1"
    assert "ParseError at offset 11" in err and "g.txt:3" in err


def test_validate_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/grids")
    assert code == 1 and "no such file" in err


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        cli.main(["invariants"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["destab", UNKNOT, "--sign", "sideways"])
    assert e.value.code == 2


def test_stdin(capsys, monkeypatch):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(f"{TREFOIL}\n\n{UNKNOT}\n"))
    code, out, _ = run(capsys, "invariants", "-")
    assert code == 0 and len(out.splitlines()) == 2


def test_render(capsys):
    code, out, _ = run(capsys, "render", UNKNOT)
    assert code == 0 and "X" in out and "O" in out


def test_fingerprint(capsys):
    code, out, _ = run(capsys, "fingerprint", TREFOIL, "4;x=1,2,3,4;o=2,1,4,3")
    lines = out.splitlines()
    assert code == 0
    assert "alexander=1,-1,1" in lines[0] and "determinant=3" in lines[0]
    assert "name=m3_1" in lines[0] and "legendrian_type=3_1" in lines[0]
    assert lines[1] == "components=2"


def test_isotopic(capsys, tmp_path):
    out_path = tmp_path / "path.txt"
    code, out, _ = run(capsys, "isotopic", UNKNOT, "2;x=1,2;o=2,1", "--path-out", str(out_path))
    assert code == 0
    assert out.splitlines()[0] == "connected length=1"
    # replay the saved path
    code, out, _ = run(capsys, "moves", "apply", str(out_path), UNKNOT)
    assert code == 0 and out.strip() == "2;x=1,2;o=2,1"


def test_isotopic_not_found_exits_zero(capsys):
    code, out, _ = run(capsys, "isotopic", UNKNOT, TREFOIL, "--max-nodes", "200")
    assert code == 0 and not out.startswith("connected")


def test_moves_apply(capsys, tmp_path):
    p = tmp_path / "moves.txt"
    p.write_text("stab:X:NE@1\n# comment\ncyc:top\n")
    code, out, _ = run(capsys, "moves", "apply", str(p), TREFOIL)
    assert code == 0
    g = decode(TREFOIL)
    want = mv.apply_path(g, [mv.MoveDescriptor.parse("stab:X:NE@1"), mv.MoveDescriptor.parse("cyc:top")])
    assert out.strip() == encode(want)
    p.write_text("flip:nowhere\n")
    code, _, err = run(capsys, "moves", "apply", str(p), TREFOIL)
    assert code == 1 and "moves.txt:1" in err


def test_moves_list(capsys):
    code, out, _ = run(capsys, "moves", "list", UNKNOT)
    assert code == 0
    for line in out.splitlines():
        m, g = line.split()
        assert encode(mv.apply_move(decode(UNKNOT), mv.MoveDescriptor.parse(m))) == g


def test_destab(capsys):
    g = mv.stabilize(decode(TREFOIL), mv.StabType.parse("X:NE"), 2)
    code, out, _ = run(capsys, "destab", encode(g))
    assert code == 0 and out.startswith("yes ")
    smaller = out.split()[3]
    assert decode(smaller).size == 5
    code, out, _ = run(capsys, "destab", TREFOIL)
    assert out.startswith("not-found exhausted=yes")


def test_enumerate(capsys):
    assert run(capsys, "enumerate", "4", "--count-only")[1].strip() == "216"
    assert run(capsys, "enumerate", "4", "--quotient", "--count-only")[1].strip() == "19"
    code, out, _ = run(capsys, "enumerate", "3")
    assert code == 0 and len(out.splitlines()) == 12
    a = run(capsys, "enumerate", "8", "--sampled", "5", "--seed", "9")[1]
    b = run(capsys, "enumerate", "8", "--sampled", "5", "--seed", "9")[1]
    assert a == b and len(a.splitlines()) == 5


def test_workers_env(monkeypatch):
    parser = cli.build_parser()
    monkeypatch.setenv("LEGATLAS_WORKERS", "3")
    assert cli.RunConfig.from_args(parser.parse_args(["invariants", UNKNOT])).workers == 3
    assert cli.RunConfig.from_args(parser.parse_args(["invariants", UNKNOT, "--workers", "2"])).workers == 2
    cfg = cli.RunConfig.from_args(parser.parse_args(["invariants", UNKNOT, "--deterministic"]))
    assert cfg.workers == 1 and cfg.as_dict()["time_limit"] is None


def test_atlas_run_export_conjecture(capsys, tmp_path):
    out = tmp_path / "run"
    code, text, _ = run(capsys, "atlas", "run", "--max-n", "4", "--out", str(out), "--deterministic", "--no-plots")
    assert code == 0
    assert "layer G: 1 records" in text and "layer T: 3 records" in text
    assert (out / "layer_S.csv").read_text().count("\n") == 3

    again = tmp_path / "again"
    code, _, _ = run(capsys, "atlas", "export", str(out), "--out", str(again), "--no-plots")
    assert code == 0
    for name in ("layer_G.csv", "layer_S.csv", "layer_T.csv", "atlas.jsonl"):
        assert (again / name).read_bytes() == (out / name).read_bytes()
    assert (again / "mountain" / "0_1.txt").read_text() == (out / "mountain" / "0_1.txt").read_text()

    code, text, _ = run(capsys, "conjecture", "--report", str(out / "report.json"))
    assert code == 0 and text.strip().endswith("total violations=0")
    assert "0_1 arc_index=2 max_tb=-1" in text

    code, _, err = run(capsys, "atlas", "export", str(tmp_path / "missing"), "--out", str(again))
    assert code == 1 and "no such file" in err


def test_conjecture_census(capsys):
    code, text, _ = run(capsys, "conjecture", "--max-n", "5")
    assert code == 0
    assert "3_1 arc_index=5 max_tb=1" in text
    assert text.strip().endswith("total violations=0")


def test_console_script():
    proc = subprocess.run(
        [sys.executable, "-m", "legatlas.cli", "invariants", UNKNOT], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "tb=-1 r=0 sl=-1 components=1"
    proc = subprocess.run([sys.executable, "-m", "legatlas.cli"], capture_output=True, text=True)
    assert proc.returncode == 2
