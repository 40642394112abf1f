import json
import os
from pathlib import Path

import numpy as np
import pytest

import main
from adq.CliIo.FileFormats import FileFormats
from adq.CliIo.FileFormatsModels import Provenance
from adq.CliIo.MeshExporter import MeshExporter
from adq.CliIo.Verifier import Verifier, chord_oracle
from adq.CliIo.VerifierModels import VerifySuite
from adq.Config import Budgets
from adq.ConvexCore.ConvexCoreModels import BallBody
from adq.Errors import BadDims, SchemaError
from adq.Solver.SolverModels import SolveConfig

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def files():
    return FileFormats()


def write_json(path: Path, document: dict) -> str:
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def test_measure_round_trip_is_byte_stable(fixtures, files, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    files.save_measure(str(first), fixtures.octagon_measure())
    loaded = files.load_measure(str(first))
    files.save_measure(str(second), loaded)
    assert first.read_bytes() == second.read_bytes()
    assert loaded.even
    assert np.array_equal(loaded.atoms, fixtures.octagon_measure().atoms)


def test_measure_atoms_are_normalized_on_load(files, tmp_path):
    path = write_json(tmp_path / "m.json", {"version": 1, "n": 2, "atoms": [[2.0, 0.0], [0.0, -3.0], [-1.0, 1.0]], "weights": [1, 2, 3]})
    measure = files.load_measure(path)
    assert measure.atoms[0].tolist() == [1.0, 0.0]
    assert np.linalg.norm(measure.atoms, axis=1) == pytest.approx(np.ones(3))


def test_body_round_trip(fixtures, files, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    provenance = Provenance(command="test", seed=7, budgets=Budgets())
    files.save_body(str(first), fixtures.cube(), provenance)
    cube = files.load_body(str(first))
    files.save_body(str(second), cube, provenance)
    assert first.read_bytes() == second.read_bytes()
    assert np.array_equal(cube.supports, fixtures.cube().supports)


def test_ball_body_file(files):
    ball = files.load_body(str(FIXTURES / "ball3.json"))
    assert isinstance(ball, BallBody)
    assert ball.dim == 3


def test_report_round_trip(fixtures, files, solver, tmp_path):
    report = solver.solve_discrete_lp(fixtures.triangle_measure(), SolveConfig(p=3.0, m=1))
    path = tmp_path / "report.json"
    files.save_report(str(path), report, Provenance(command="solve", seed=report.seed, budgets=report.budgets))
    loaded = files.load_report(str(path))
    assert loaded.converged
    assert loaded.atoms == report.atoms
    assert loaded.body.supports == report.polytope.supports.tolist()
    assert loaded.body.provenance.command == "solve"
    assert loaded.trace_breaks == report.trace_breaks
    assert path.read_text(encoding="utf-8") == loaded.model_dump_json(indent=2) + "\n"


@pytest.mark.parametrize(
    ("document", "field"),
    [
        ({"version": 1, "n": 2, "atoms": [[1.0, 0.0]], "weights": [-1.0]}, "weights"),
        ({"version": 1, "n": 2, "atoms": [[0.0, 0.0]], "weights": [1.0]}, "atoms"),
        ({"version": 2, "n": 2, "atoms": [[1.0, 0.0]], "weights": [1.0]}, "version"),
        ({"version": 1, "n": 2, "atoms": [[1.0, 0.0, 0.0]], "weights": [1.0]}, "<document>"),
    ],
)
def test_measure_schema_errors(files, tmp_path, document, field):
    path = write_json(tmp_path / "bad.json", document)
    with pytest.raises(SchemaError) as caught:
        files.load_measure(path)
    assert caught.value.field == field


def test_malformed_and_missing_files(files, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"n\": 2,", encoding="utf-8")
    with pytest.raises(SchemaError) as caught:
        files.load_measure(str(path))
    assert caught.value.field == "<document>"
    with pytest.raises(SchemaError) as caught:
        files.load_body(str(tmp_path / "missing.json"))
    assert caught.value.field == "path"


def test_unbounded_body_file(files, tmp_path):
    path = write_json(
        tmp_path / "open.json",
        {"version": 1, "n": 2, "normals": [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]], "supports": [1.0, 1.0, 1.0]},
    )
    with pytest.raises(SchemaError) as caught:
        files.load_body(path)
    assert caught.value.field == "supports"


def test_cube_mesh(fixtures, tmp_path):
    exporter = MeshExporter()
    path = tmp_path / "cube.obj"
    exporter.export_mesh(fixtures.cube(), str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert sum(line.startswith("v ") for line in lines) == 8
    assert sum(line.startswith("f ") for line in lines) == 12
    vertices, faces = exporter.read_mesh(str(path))
    assert np.array_equal(vertices, fixtures.cube().vertices)
    assert exporter.mesh_volume(vertices, faces) == pytest.approx(8.0)


def test_mesh_needs_three_dimensions(fixtures):
    with pytest.raises(BadDims):
        MeshExporter().triangles(fixtures.square())


def test_polygon_csv(fixtures, tmp_path):
    path = tmp_path / "square.csv"
    MeshExporter().export_polygon_csv(fixtures.square(), str(path))
    assert path.read_text(encoding="utf-8").splitlines()[0] == "x,y"
    vertices = np.loadtxt(path, delimiter=",", skiprows=1)
    assert vertices.shape == (4, 2)
    angles = np.unwrap(np.arctan2(vertices[:, 1], vertices[:, 0]))
    assert np.all(np.diff(angles) > 0.0)


def test_cli_eval_and_exit_codes(tmp_path):
    assert main.main(["eval", "psi", "--body", str(FIXTURES / "square.json"), "--m", "1"]) == 0
    assert main.main(["eval", "vq", "--body", str(FIXTURES / "cube.json"), "--q", "3"]) == 0
    table = tmp_path / "ibody.csv"
    assert main.main(["eval", "ibody", "--body", str(FIXTURES / "square.json"), "--directions", "8", "--out", str(table)]) == 0
    assert np.loadtxt(table, delimiter=",", skiprows=1).shape == (8, 3)
    assert main.main(["eval", "psi", "--body", str(tmp_path / "missing.json")]) == 1


def test_cli_solve(tmp_path):
    body, report = tmp_path / "body.json", tmp_path / "report.json"
    args = ["--out", str(body), "--report", str(report)]
    assert main.main(["solve", "--measure", str(FIXTURES / "hemi.json"), "--p", "3", "--m", "1"] + args) == 2
    assert not body.exists()
    assert main.main(["solve", "--measure", str(FIXTURES / "tri.json"), "--p", "2", "--m", "1"] + args) == 3
    assert main.main(["solve", "--measure", str(FIXTURES / "tri.json"), "--p", "3", "--m", "1"] + args) == 0
    document = json.loads(report.read_text(encoding="utf-8"))
    assert document["converged"]
    assert document["body"]["provenance"]["command"].startswith("solve ")


def test_cli_export(tmp_path):
    mesh = tmp_path / "cube.obj"
    assert main.main(["export", "--body", str(FIXTURES / "cube.json"), "--out", str(mesh)]) == 0
    assert mesh.exists()
    assert main.main(["export", "--body", str(FIXTURES / "ball2.json"), "--out", str(tmp_path / "ball.csv"), "--csv"]) == 1
    assert main.main(["export", "--body", str(FIXTURES / "square.json"), "--out", str(tmp_path / "sq.csv")]) == 1
    assert main.main(["export", "--body", str(FIXTURES / "square.json"), "--out", str(tmp_path / "sq.csv"), "--csv"]) == 0


def test_command_line_is_order_independent():
    parser = main.build_parser()
    first = parser.parse_args(["solve", "--measure", "m.json", "--p", "3", "--m", "1", "--seed", "4"])
    second = parser.parse_args(["solve", "--seed", "4", "--m", "1", "--p", "3", "--measure", "m.json"])
    assert main.command_line(first) == main.command_line(second)


def test_budgets_from_environment(monkeypatch):
    monkeypatch.setenv("ADQ_BUDGET_SPHERE", "64")
    monkeypatch.setenv("ADQ_SEED", "11")
    budgets = Budgets.from_env()
    assert budgets.sphere == 64
    assert budgets.seed == 11
    args = main.build_parser().parse_args(["verify", "--seed", "3"])
    assert main.resolve_budgets(args).seed == 3


@pytest.mark.parametrize("suite", [VerifySuite.Admissibility, VerifySuite.Homogeneity, VerifySuite.Square])
def test_verifier_suites_pass(suite):
    results = Verifier(Budgets()).run([suite])
    assert results
    assert all(check.passed for check in results), [check.detail for check in results if not check.passed]


def test_budgets_parse_adaptive_settings(monkeypatch):
    monkeypatch.setenv("ADQ_ADAPTIVE_RTOL", " 2.5e-5 ")
    monkeypatch.setenv("ADQ_ADAPTIVE_NODES", "50000")
    budgets = Budgets.from_env()
    assert budgets.adaptive_rtol == 2.5e-5
    assert budgets.adaptive_nodes == 50_000
    monkeypatch.setenv("ADQ_ADAPTIVE_RTOL", "2")
    with pytest.raises(ValueError):
        Budgets.from_env()


def test_failed_rename_keeps_the_old_file(fixtures, monkeypatch, tmp_path):
    path = tmp_path / "cube.obj"
    path.write_text("previous\n", encoding="utf-8")

    def refuse(source, target):
        raise OSError("read-only target")

    monkeypatch.setattr(os, "replace", refuse)
    with pytest.raises(OSError):
        MeshExporter().export_mesh(fixtures.cube(), str(path))
    with pytest.raises(OSError):
        MeshExporter().export_table(str(path), ["x", "y"], np.eye(2))
    assert path.read_text(encoding="utf-8") == "previous\n"
    assert list(tmp_path.glob("*.tmp")) == []


def test_mesh_and_table_share_the_atomic_writer(fixtures, monkeypatch, tmp_path):
    written = []
    monkeypatch.setattr(FileFormats, "write_text", staticmethod(lambda path, text: written.append(path)))
    exporter = MeshExporter()
    exporter.export_mesh(fixtures.cube(), str(tmp_path / "cube.obj"))
    exporter.export_polygon_csv(fixtures.square(), str(tmp_path / "square.csv"))
    exporter.export_table(str(tmp_path / "table.csv"), ["x", "y"], np.eye(2))
    assert [Path(path).name for path in written] == ["cube.obj", "square.csv", "table.csv"]
    assert not any(tmp_path.iterdir())


def test_cli_eval_ball_and_polygons(files, functionals, tmp_path):
    assert main.main(["eval", "psi", "--body", str(FIXTURES / "ball2.json"), "--m", "1"]) == 0
    assert main.main(["eval", "psi", "--body", str(FIXTURES / "octagon.json"), "--m", "1"]) == 0
    octagon = files.load_body(str(FIXTURES / "octagon.json"))
    assert functionals.psi_grassmann(octagon, 1) == pytest.approx(chord_oracle(octagon), rel=1e-9)

    out = tmp_path / "atoms.json"
    assert main.main(["eval", "atoms", "--body", str(FIXTURES / "triangle.json"), "--p", "1.5", "--out", str(out)]) == 0
    saved = files.load_measure(str(out))
    atoms = functionals.curvature_atoms(files.load_body(str(FIXTURES / "triangle.json")), 1.5, 1)
    assert saved.size == 3
    assert np.allclose(saved.atoms, atoms.normals)
    assert np.allclose(saved.weights, atoms.masses, rtol=1e-12)


@pytest.mark.parametrize(
    ("measure", "half_width"),
    [("cross4.json", np.sqrt(np.pi / 4.0)), ("cross8.json", None)],
)
def test_cli_solve_symmetric(files, tmp_path, measure, half_width):
    body, report = tmp_path / "body.json", tmp_path / "report.json"
    args = ["solve", "--symmetric", "--measure", str(FIXTURES / measure), "--p", "0", "--m", "1"]
    args += ["--out", str(body), "--report", str(report)]
    if measure == "cross4.json":
        # two lines each carrying half the mass sit on the concentration bound
        assert main.main(args) == 2
        assert not body.exists()
        args.append("--force")
    else:
        unit = files.load_body(str(FIXTURES / "octagon.json"))
        half_width = np.sqrt(8.0 / chord_oracle(unit))
    assert main.main(args) == 0
    document = files.load_report(str(report))
    assert document.converged
    assert document.j_value is not None
    assert np.allclose(document.body.supports, half_width, rtol=1e-3)
    assert ("subspace-concentration-violated" in document.flags) == (measure == "cross4.json")


@pytest.mark.slow
@pytest.mark.parametrize("suite", [VerifySuite.Representation, VerifySuite.TotalMass, VerifySuite.SlInvariance])
def test_verifier_suites_pass_at_default_budgets(suite):
    results = Verifier(Budgets()).run([suite])
    assert results
    assert all(check.passed for check in results), [check.detail for check in results if not check.passed]
