import json
import subprocess
import sys
from pathlib import Path

import pytest

from polyepi.catalog import CATALOG_IDS, parse_catalog_id
from polyepi.cli import main
from polyepi.io import load_geometry, load_morphism
from polyepi.morphisms import is_epimorphism

GOLDEN = Path(__file__).parent / "golden"


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def last_json(stdout):
    return json.loads(stdout.strip().splitlines()[-1])


def test_gen_and_verify(tmp_path, capsys):
    path = tmp_path / "fano.geom"
    code, _, _ = run_cli(capsys, "gen", "plane", "2", "-o", str(path))
    assert code == 0 and path.exists()
    code, out, _ = run_cli(capsys, "verify", "--n", "3", str(path), "--json")
    rep = last_json(out)
    assert code == 0 and rep["verdicts"]["generalized-polygon"] is True
    assert rep["artifacts"] == [] and rep["inputs"] == [str(path)]


@pytest.mark.parametrize("cid", CATALOG_IDS)
def test_gen_pipe_verify(cid):
    gen = subprocess.run([sys.executable, "-m", "polyepi", "gen", cid], capture_output=True,
                         text=True, check=True)
    ver = subprocess.run([sys.executable, "-m", "polyepi", "verify", "-"], input=gen.stdout,
                         capture_output=True, text=True)
    assert ver.returncode == 0, ver.stdout + ver.stderr
    assert "weak-polygon: True" in ver.stdout


@pytest.mark.parametrize("name,argv", [
    ("verify_plane2", ["verify", "plane:2"]),
    ("count_epi_fano_triangle", ["count-epi", "plane:2", "ordinary:3"]),
    ("iso_gq2", ["iso", "gq:2", "gq:2", "--up-to-duality"]),
    ("verify_grid2_thick", ["verify", "grid:2", "--n", "4", "--thick"]),
])
def test_json_schema_is_stable(name, argv, capsys):
    _, out, _ = run_cli(capsys, *argv, "--json")
    rep = last_json(out)
    assert isinstance(rep.pop("wall_time"), float)
    assert rep == json.loads((GOLDEN / f"{name}.json").read_text())


class TestExitCodes:
    def test_false_verdict(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "plane:2", "--n", "4")
        assert code == 1 and "witness" in out

    def test_thick_required(self, capsys):
        assert run_cli(capsys, "verify", "grid:2", "--thick")[0] == 1

    def test_bad_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.geom"
        bad.write_text("points 1\nlines 1\nline 0: 0 0\n")
        code, _, err = run_cli(capsys, "verify", str(bad))
        assert code == 2 and "line 3" in err

    def test_missing_file(self, capsys):
        assert run_cli(capsys, "verify", "no/such/file.geom")[0] == 2

    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_budget(self, capsys):
        code, out, _ = run_cli(capsys, "count-epi", "gq:2", "ordinary:4", "--max-nodes", "10", "--json")
        assert code == 3 and last_json(out)["verdicts"]["status"] == "budget exceeded"

    def test_unsupported_catalog(self, capsys):
        assert run_cli(capsys, "gen", "plane", "5")[0] == 2


def test_transforms(tmp_path, capsys):
    d = tmp_path / "d.geom"
    assert run_cli(capsys, "double", "plane:2", "-o", str(d))[0] == 0
    assert load_geometry(d).point_count == 14
    u = tmp_path / "u.geom"
    assert run_cli(capsys, "undouble", str(d), "-o", str(u))[0] == 0
    assert run_cli(capsys, "iso", str(u), "plane:2", "--up-to-duality")[0] == 0
    code, out, _ = run_cli(capsys, "dual", "grid:2")
    assert code == 0 and out.startswith("points 6\nlines 9\n")


def test_parity_listing(tmp_path, capsys):
    classes = tmp_path / "classes.txt"
    q = tmp_path / "q.geom"
    code, _, _ = run_cli(capsys, "parity", "thin:8:2", "--classes", str(classes), "-o", str(q))
    assert code == 0
    rows = [line.split() for line in classes.read_text().splitlines()]
    assert len(rows) == 30 and {r[1] for r in rows} == {"U", "V"}
    assert run_cli(capsys, "iso", str(q), "gq:2", "--up-to-duality")[0] == 0


def test_build_and_classify(tmp_path, capsys):
    fano = parse_catalog_id("plane:2")
    a, b, c = fano.line_points[0]
    path = tmp_path / "phi.morph"
    code, _, _ = run_cli(capsys, "build-epi", "plane:2", "--m", "3", "--base", "0",
                         "--partition", f"{a}|{b},{c}", "-o", str(path))
    assert code == 0
    mor = load_morphism(path)
    assert is_epimorphism(mor)
    code, out, _ = run_cli(capsys, "classify-epi", str(path), "--json")
    rep = last_json(out)
    assert code == 0 and rep["verdicts"]["classified"] is True


def test_build_rejects_bad_partition(capsys):
    code, _, err = run_cli(capsys, "build-epi", "plane:2", "--m", "3", "--base", "0",
                           "--partition", "|0,1,2")
    assert code == 2 and "nonempty" in err


def test_enum_epi_classify(tmp_path, capsys):
    out_dir = tmp_path / "epis"
    code, out, _ = run_cli(capsys, "enum-epi", "plane:2", "ordinary:3", "--classify", "--json",
                           "--out-dir", str(out_dir))
    lines = out.strip().splitlines()
    records = [json.loads(line) for line in lines[:-1]]
    rep = json.loads(lines[-1])
    assert code == 0 and len(records) == 126
    assert all(r["class"] in ("a", "b") for r in records)
    assert rep["verdicts"]["classified"] == 126
    assert len(list(out_dir.glob("*.morph"))) == 126
    assert is_epimorphism(load_morphism(out_dir / "epi_00000.morph"))
    assert (out_dir / "results.jsonl").read_text().count("\n") == 126


def test_embed(capsys):
    code, out, _ = run_cli(capsys, "embed", "ordinary:3", "plane:2", "--json")
    assert code == 0 and last_json(out)["verdicts"]["embeds"] is True
    assert run_cli(capsys, "embed", "ordinary:3", "grid:2")[0] == 1


def test_free(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "free", "--target", "grid:2", "--n", "4", "--rounds", "1",
                           "--out-dir", str(tmp_path), "--json")
    rep = last_json(out)
    assert code == 0 and rep["verdicts"]["girth_ok"] and rep["verdicts"]["epimorphism"]
    mor = load_morphism(tmp_path / "free.morph")
    assert is_epimorphism(mor)
    audit = json.loads((tmp_path / "report.json").read_text())
    assert [r["round"] for r in audit["rounds_report"]] == [0, 1]


def test_free_caps(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "free", "--target", "grid:2", "--n", "4", "--rounds", "1",
                         "--max-elements", "100", "--out-dir", str(tmp_path))
    assert code == 3


def test_free_is_deterministic(tmp_path, capsys):
    for sub in ("a", "b"):
        run_cli(capsys, "free", "--target", "grid:2", "--n", "4", "--rounds", "1", "--seed", "7",
                "--out-dir", str(tmp_path / sub))
    assert (tmp_path / "a" / "free.geom").read_text() == (tmp_path / "b" / "free.geom").read_text()
    assert (tmp_path / "a" / "free.morph").read_text() == (tmp_path / "b" / "free.morph").read_text()
