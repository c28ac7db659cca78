import numpy as np
import pytest

from sweepfv.cli import (EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_PARSE, AccuracyTable,
                         cmd_accuracy, cmd_orderings, cmd_stencils, main)
from sweepfv.io import (ConfigError, RunConfig, dump_config, load_packaged_mesh, packaged_mesh_names,
                        parse_config, read_residue_csv, read_vtk_cell_data, vtk_text)
from sweepfv.mesh import read_mesh, write_mesh


def test_packaged_meshes():
    assert packaged_mesh_names() == ["shock_reflection.mesh", "square_58.mesh"]
    assert 2000 <= load_packaged_mesh("shock_reflection.mesh").n_cells <= 6000


def test_config_roundtrip():
    cfg = parse_config("case = euler_source  # with source\ndriver = rk3\ncfl = 0.3\n"
                       "ref_points = 0,0, 1,0, 0,1, 1,1\n")
    assert cfg.driver == "rk3_jacobi" and cfg.cfl == 0.3 and cfg.ref_points[2] == 1.0
    assert parse_config(dump_config(cfg)) == cfg


@pytest.mark.parametrize("text", ["cfl 0.3", "colour = red", "cfl = fast", "cfl = 0.1\ncfl = 0.2",
                                  "driver = euler", "cfl = -1", "ref_points = 1,2,3"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_mesh_in_config():
    with pytest.raises(FileNotFoundError):
        RunConfig(mesh="/does/not/exist.mesh")


def test_vtk_layout(square):
    U = np.tile([1.0, 0.5, 0.0, 2.5], (square.n_cells, 1))
    text = vtk_text(square, U)
    assert "DATASET UNSTRUCTURED_GRID" in text
    assert f"CELLS {square.n_cells} {4 * square.n_cells}" in text
    assert text.count("SCALARS") == 4


def test_run_writes_artifacts(tmp_path):
    rc = main(["run", "--case", "euler_nosource", "--driver", "sweep", "--cfl", "0.6",
               "--out", str(tmp_path / "a")])
    assert rc == EXIT_OK
    data = read_vtk_cell_data(tmp_path / "a" / "solution.vtk")
    assert sorted(data) == ["p", "rho", "u", "v"] and len(data["rho"]) == 58
    rows = read_residue_csv(tmp_path / "a" / "residue.csv")
    assert rows[-1][1] <= 1e-12
    summary = (tmp_path / "a" / "summary.txt").read_text().split()
    assert summary[1:3] == ["fe_fast_sweep", "0.6"] and summary[-1] == "true"
    # determinism
    main(["run", "--case", "euler_nosource", "--driver", "sweep", "--out", str(tmp_path / "b")])
    for name in ("solution.vtk", "residue.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_not_converged_exit_code(tmp_path):
    rc = main(["run", "--driver", "fe", "--cfl", "0.1", "--max-iters", "5", "--out", str(tmp_path)])
    assert rc == EXIT_NOT_CONVERGED
    assert (tmp_path / "summary.txt").read_text().split()[-1] == "false"


def test_exit_codes(tmp_path):
    assert main(["run", "--mesh", str(tmp_path / "nope.mesh")]) == EXIT_IO
    bad = tmp_path / "bad.mesh"
    bad.write_text("3 1\n")
    assert main(["run", "--mesh", str(bad)]) == EXIT_PARSE
    assert main(["run", "--case", "no_such_case"]) == EXIT_PARSE
    cfg = tmp_path / "c.cfg"
    cfg.write_text("cfl = nope\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_PARSE
    with pytest.raises(SystemExit):
        main(["run", "--driver", "euler"])


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("case = euler_nosource\ndriver = fe\ncfl = 0.1\nmax_iters = 4\n")
    rc = main(["run", "--config", str(cfg), "--max-iters", "2", "--out", str(tmp_path / "o")])
    assert rc == EXIT_NOT_CONVERGED
    assert len(read_residue_csv(tmp_path / "o" / "residue.csv")) == 2


def test_refine_command(tmp_path, square):
    src = tmp_path / "in.mesh"
    write_mesh(square, src)
    assert main(["refine", str(src), str(tmp_path / "out.mesh"), "--times", "2"]) == EXIT_OK
    assert read_mesh(tmp_path / "out.mesh").n_cells == 16 * square.n_cells


def test_orderings_and_stencil_dumps():
    text = cmd_orderings(RunConfig())
    assert len(text.strip().splitlines()) == 59
    dump = cmd_stencils(RunConfig()).splitlines()
    assert len(dump) == 1 + 5 * 58
    assert dump[1].startswith("0 T1 4 0 ")


def test_accuracy_table_constant_solution():
    table = cmd_accuracy(RunConfig(case="uniform_flow", max_iters=20), levels=1)
    assert len(table.rows) == 2
    assert table.rows[0][1] < 1e-13 and table.orders() == [None]
    assert "n/a" in table.text()


def test_accuracy_orders():
    t = AccuracyTable()
    t.add(58, 1e-2, 4e-2, 100, 1.0)
    t.add(232, 1e-2 / 32, 4e-2 / 16, 120, 2.0)
    assert t.orders() == [pytest.approx(5.0)] and t.orders("linf") == [pytest.approx(4.0)]
