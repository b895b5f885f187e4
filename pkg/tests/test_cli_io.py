import os

import numpy as np
import pytest

from rbweno import benchmarks
from rbweno.basis import make_space
from rbweno.cli import main, run_benchmark
from rbweno.config import ConfigError, RunConfig, parse_config, serialize_config
from rbweno.io import line_profile, write_csv, write_profile_csv, write_vtk
from rbweno.mesh import build_uniform_line, build_uniform_quad


def test_kpp_defaults():
    cfg = parse_config('benchmark = "kpp"')
    assert cfg.uniform_weights is True           # 0.2 linear weights on full stencils
    assert cfg.elements == (64,)
    assert cfg.degree == 2
    assert cfg.r == 2 and cfg.eps_w == 1e-6 and cfg.delta == 1e-6 and cfg.q == 1.0


def test_range_error_has_line():
    with pytest.raises(ConfigError) as exc:
        parse_config('benchmark = "kpp"\ntheta = -1')
    assert "line 2" in str(exc.value)


def test_unknown_key_and_syntax_errors():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("bogus = 3")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config('benchmark = "kpp"\nnot a kv line')
    with pytest.raises(ConfigError):
        parse_config('benchmark = "unknown_bench"')
    with pytest.raises(ConfigError):
        parse_config("theta = 1.0")             # missing benchmark


def test_roundtrip():
    cfg = parse_config(
        'benchmark = "titarev_toro"\ntheta = 10\ndegree = 1\nelements = [250]\n'
        "[weno]\nneighbor_weight = 0.002\n[output]\ndir = \"results\"\n"
    )
    text = serialize_config(cfg)
    cfg2 = parse_config(text)
    assert cfg == cfg2


def test_titarev_left_state_fixture():
    assert np.allclose(
        benchmarks.TT_LEFT,
        benchmarks.physics.prim_to_cons(1.515695, [0.523346], 1.805),
    )
    x = np.array([[-4.9], [0.0]])
    u0 = benchmarks.titarev_toro_initial(x)
    assert np.allclose(u0[:, 0], benchmarks.TT_LEFT)
    assert abs(u0[0, 1] - (1.0 + 0.1 * np.sin(20 * np.pi * (0.0 - 5.0)))) < 1e-12


def test_sbr_initial_fixture():
    # classic slotted cylinder: the slot is the channel |x-0.5| < 0.025,
    # y < 0.85 cut out of the disc, so the disc center sits inside the slot
    assert benchmarks.sbr_initial(np.array([[0.5, 0.75]]))[0] == 0.0
    assert benchmarks.sbr_initial(np.array([[0.55, 0.75]]))[0] == 1.0   # beside the slot
    assert benchmarks.sbr_initial(np.array([[0.5, 0.87]]))[0] == 1.0    # bridge above
    assert benchmarks.sbr_initial(np.array([[0.5, 0.7]]))[0] == 0.0     # inside slot
    # hump center: 0.25 + 0.25*cos(0) = 0.5; cone center: 1
    assert abs(benchmarks.sbr_initial(np.array([[0.25, 0.5]]))[0] - 0.5) < 1e-14
    assert abs(benchmarks.sbr_initial(np.array([[0.5, 0.25]]))[0] - 1.0) < 1e-14


def test_kh_fixture_states():
    x = np.array([[0.3, 0.5], [0.3, 0.1]])
    u0 = benchmarks.kelvin_helmholtz_initial(x)
    rho, vx = u0[0], u0[1] / u0[0]
    assert rho[0] == 2.0 and rho[1] == 1.0
    assert abs(vx[0] + 0.5) < 1e-14 and abs(vx[1] - 0.5) < 1e-14
    vy = u0[2] / u0[0]
    assert np.allclose(vy, 0.01 * np.sin(2 * np.pi * (0.3 - 0.5)))
    p = 0.4 * (u0[3] - 0.5 * (u0[1] ** 2 + u0[2] ** 2) / u0[0])
    assert np.allclose(p, 2.5)


def test_write_csv_header_only(tmp_path):
    path = str(tmp_path / "empty.csv")
    write_csv(path, ["x", "u"], [])
    assert open(path).read() == "x,u\n"


def test_profile_csv(tmp_path):
    m = build_uniform_line(0, 1, 4)
    sp = make_space(m, "DG", 1)
    u = sp.interpolate(lambda x: x[:, 0])[None]
    path = str(tmp_path / "prof.csv")
    write_profile_csv(path, sp, u, ["u"])
    lines = open(path).read().splitlines()
    assert lines[0] == "x,u"
    assert len(lines) == 1 + sp.num_dofs
    x, v = line_profile(sp, u)
    assert (np.diff(x) >= 0).all()


def test_vtk_single_element(tmp_path):
    m = build_uniform_quad(0, 0, 1, 1, 1, 1)
    sp = make_space(m, "CG", 2)
    u = sp.interpolate(lambda x: x[:, 0] + x[:, 1])
    path = str(tmp_path / "one.vtk")
    write_vtk(path, sp, {"u": u})
    text = open(path).read()
    assert text.startswith("# vtk DataFile Version 3.0")
    assert "POINTS 9 double" in text
    assert "CELLS 1 10" in text
    assert "CELL_TYPES 1\n28" in text
    assert "SCALARS u double 1" in text
    # (p+1)^d point-data entries
    data = text.split("LOOKUP_TABLE default\n", 1)[1].strip().splitlines()
    assert len(data) == 9


def test_byte_stable_rerun(tmp_path):
    cfg = RunConfig(benchmark="titarev_toro", **benchmarks.benchmark_defaults("titarev_toro"))
    cfg.elements = (40,)
    cfg.degree = 1
    cfg.t_final = 0.05
    cfg.output_dir = str(tmp_path / "a")
    cfg.validate()
    run_benchmark(cfg)
    cfg.output_dir = str(tmp_path / "b")
    run_benchmark(cfg)
    for name in ("titarev_toro_profile.csv", "titarev_toro_diag.csv"):
        a = open(os.path.join(str(tmp_path / "a"), name), "rb").read()
        b = open(os.path.join(str(tmp_path / "b"), name), "rb").read()
        assert a == b


def test_cli_convergence_and_selftest(tmp_path, capsys):
    rc = main([
        "convergence", "--problem", "cdr_mms", "--levels", "2", "--base-n", "4",
        "--degree", "1", "--scheme", "weno", "--out", str(tmp_path),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "rate_L2" in out
    files = os.listdir(tmp_path)
    assert any(f.endswith(".csv") for f in files)


def test_cli_bench_small(tmp_path):
    rc = main([
        "bench", "titarev_toro", "--elements", "32", "--degree", "1",
        "--t-final", "0.02", "--out", str(tmp_path),
    ])
    assert rc == 0
    assert any(f.endswith("profile.csv") for f in os.listdir(tmp_path))


def test_cli_config_error_exit(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('benchmark = "kpp"\ntheta = -2\n')
    rc = main(["solve", "--config", str(bad)])
    assert rc == 2


def test_convergence_csv_schema(tmp_path):
    from rbweno.cdr import convergence_study
    from rbweno.io import write_convergence_csv

    tab = convergence_study(benchmarks.cdr_mms_factory(1.0), 2, 4, 2, 1, "cg", "high_order")
    path = str(tmp_path / "conv.csv")
    write_convergence_csv(path, tab)
    header = open(path).read().splitlines()[0]
    assert header == "h,dofs,err_L2,err_S,rate_L2,rate_S,picard_iters"
