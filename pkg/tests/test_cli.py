import csv
import json
import math

import numpy as np
import pytest

from capbound import cli
from capbound.anisotropic import SmoothedLqNorm, dual_norm
from capbound.surface import read_obj


def run(capsys, *argv):
    code = cli.main(["--no-banner", *argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_bound_thm5_sphere(capsys):
    code, out, _ = run(capsys, "bound", "--theorem", "thm5", "--p", "2", "--builtin", "sphere:r=1")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1
    assert rep["case_label"] == "equality/round-sphere"
    assert rep["value"] == pytest.approx(4 * math.pi, rel=1e-12)
    assert list(rep)[1:] == ["theorem", "case_label", "p", "inputs", "value", "quadrature_error", "hypotheses"]


def test_bound_thm1_h2_circle(capsys):
    code, out, _ = run(capsys, "bound", "--theorem", "thm1", "--p", "2", "--ambient", "h2", "--builtin", "circle:r=1")
    assert code == 0
    want = 4 * math.pi / math.log((math.cosh(1) + 1) / (math.cosh(1) - 1))
    assert json.loads(out)["value"] == pytest.approx(want, rel=1e-10)


def test_bound_p_out_of_range_exits_2(capsys):
    code, _, err = run(capsys, "bound", "--theorem", "thm5", "--p", "3.5", "--builtin", "sphere:r=1")
    assert code == 2
    assert "1<p<3" in err


def test_bound_deterministic_bytes(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(capsys, "bound", "--theorem", "thm3", "--p", "2", "--ambient", "h3",
                   "--builtin", "perturbed:1,0.1,2", "--grid", "coarse", "-o", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_bound_thm6_wulff(capsys):
    code, out, _ = run(capsys, "bound", "--theorem", "thm6", "--p", "2", "--norm", "ellipsoid:1,4,9",
                       "--builtin", "wulff", "--grid", "coarse")
    assert code == 0
    rep = json.loads(out)
    assert rep["value"] == pytest.approx(24 * math.pi, rel=1e-2)


def test_bound_input_errors(capsys, tmp_path):
    assert run(capsys, "bound", "--theorem", "thm5", "--p", "2", "--obj", str(tmp_path / "missing.obj"))[0] == 1
    assert run(capsys, "bound", "--theorem", "thm5", "--p", "2")[0] == 1
    assert run(capsys, "bound", "--theorem", "thm5", "--p", "2", "--builtin", "cube:1")[0] == 1
    assert run(capsys, "bound", "--theorem", "nope", "--p", "2", "--builtin", "sphere:r=1")[0] == 1


def test_bound_obj_and_radial_grid(capsys, tmp_path):
    assert run(capsys, "wulff", "--norm", "euclidean", "--grid", "coarse", "-o", str(tmp_path / "s.obj"))[0] == 0
    code, out, _ = run(capsys, "bound", "--theorem", "thm5", "--p", "2", "--obj", str(tmp_path / "s.obj"))
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(4 * math.pi, rel=2e-2)
    np.savez(tmp_path / "g.npz", radius=np.full((32, 64), 1.0), ambient="r3")
    code, out, _ = run(capsys, "bound", "--theorem", "thm5", "--p", "2", "--radial-grid", str(tmp_path / "g.npz"))
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(4 * math.pi, rel=1e-3)


def test_parse_builtin():
    assert cli.parse_builtin("sphere:r=2").params == {"r": 2.0}
    assert cli.parse_builtin("ellipsoid:1,2,3").params == {"a": 1.0, "b": 2.0, "c": 3.0}
    assert cli.parse_builtin("perturbed:amp=0.1").params == {"r": 1.0, "amp": 0.1, "mode": 2}
    for bad in ("sphere:1,2", "sphere:x=1", "sphere:-1", "perturbed:1,0.1,2.5", "sphere:abc"):
        with pytest.raises(cli.CliError):
            cli.parse_builtin(bad)


def read_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "area", "mass", "min_curv", "max_curv"]
    return np.array(rows[1:], dtype=float)


def test_flow_imcf_sphere_area_law(capsys, tmp_path):
    out = tmp_path / "imcf.csv"
    assert run(capsys, "flow", "--kind", "imcf-h3", "--builtin", "sphere:r=1", "--t-end", "2", "-o", str(out))[0] == 0
    data = read_trace(out)
    assert data[-1, 0] == 2.0
    assert data[-1, 1] == pytest.approx(math.e**2 * 4 * math.pi * math.sinh(1) ** 2, rel=1e-2)


def test_flow_iamcf_wulff_mass_zero(capsys, tmp_path):
    out = tmp_path / "iamcf.csv"
    code = run(capsys, "flow", "--kind", "iamcf-r3", "--norm", "ellipsoid:1,4,9", "--builtin", "wulff",
               "--t-end", "1", "--grid", "coarse", "-o", str(out))[0]
    assert code == 0
    assert np.max(np.abs(read_trace(out)[:, 2])) < 1e-2


def test_flow_normal_hn(capsys):
    code, out, _ = run(capsys, "flow", "--kind", "normal-hn", "--builtin", "sphere:r=1", "--t-end", "0.7")
    assert code == 0
    last = out.strip().splitlines()[-1].split(",")
    assert float(last[1]) == pytest.approx(4 * math.pi * math.sinh(1.7) ** 2, rel=1e-6)


def test_flow_bad_time_exits_1(capsys):
    assert run(capsys, "flow", "--kind", "imcf-h3", "--builtin", "sphere:r=1", "--t-end", "-1")[0] == 1


def test_flow_breakdown_exits_3_with_partial_csv(capsys, tmp_path):
    out = tmp_path / "bad.csv"
    code, _, err = run(capsys, "flow", "--kind", "imcf-h3", "--builtin", "perturbed:1,0.9,4",
                       "--grid", "coarse", "--t-end", "1", "-o", str(out))
    assert code == 3
    assert out.read_text().startswith("t,area,mass,min_curv,max_curv")


def test_wulff_euclidean(capsys, tmp_path):
    path = tmp_path / "e.obj"
    code, out, _ = run(capsys, "wulff", "--norm", "euclidean", "-o", str(path))
    assert code == 0
    info = json.loads(out)
    assert abs(info["identity_residual"]) < 1e-6
    mesh = read_obj(path)
    assert np.allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0, atol=1e-12)


def test_wulff_ellipsoid_semi_axes(capsys, tmp_path):
    path = tmp_path / "e.obj"
    assert run(capsys, "wulff", "--norm", "ellipsoid:1,4,9", "-o", str(path))[0] == 0
    v = read_obj(path).vertices
    assert np.abs(v).max(axis=0) == pytest.approx([1.0, 2.0, 3.0], rel=1e-2)


def test_wulff_lq_on_unit_dual_sphere(capsys, tmp_path):
    path = tmp_path / "lq.obj"
    assert run(capsys, "wulff", "--norm", "lq:4,0.1", "--grid", "coarse", "-o", str(path))[0] == 0
    v = read_obj(path).vertices
    assert np.max(np.abs(dual_norm(SmoothedLqNorm(4.0, 0.1), v) - 1.0)) < 1e-6


def test_wulff_ellipticity_failure_exits_2(capsys):
    assert run(capsys, "wulff", "--norm", "lq:4,0")[0] == 2
    assert run(capsys, "wulff")[0] == 1


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# thm5 on a sphere\ntheorem = thm5\np = 3.5\nbuiltin = sphere:r=1\n")
    assert cli.main(["--config", str(cfg), "--no-banner", "bound"]) == 2
    capsys.readouterr()
    assert cli.main(["--config", str(cfg), "--no-banner", "bound", "--p", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["p"] == 2.0
    bad = tmp_path / "bad.cfg"
    bad.write_text("theorem thm5\n")
    assert cli.main(["--config", str(bad), "bound"]) == 1
    assert cli.main(["--config", str(tmp_path / "none.cfg"), "bound"]) == 1


def test_banner_on_stderr_only(capsys):
    assert cli.main(["bound", "--theorem", "thm5", "--p", "2", "--builtin", "sphere:r=1"]) == 0
    out, err = capsys.readouterr()
    assert err.startswith("capbound ")
    json.loads(out)


def test_write_atomic(tmp_path):
    path = tmp_path / "x.txt"
    cli.write_atomic(path, "one")
    cli.write_atomic(path, "two")
    assert path.read_text() == "two"
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]


def test_validate_only_filter(capsys, tmp_path):
    out = tmp_path / "v.json"
    code, text, _ = run(capsys, "validate", "--only", "new-vs-old", "-o", str(out))
    assert code == 0
    assert "new-vs-old" in text and "sharpness" not in text
    rep = json.loads(out.read_text())
    assert [c["number"] for c in rep["criteria"]] == [6]


def test_validate_unknown_criterion(capsys):
    assert run(capsys, "validate", "--only", "bogus")[0] == 1
