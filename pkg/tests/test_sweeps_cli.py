import math

import numpy as np
import pytest

from jclattice.cli import main
from jclattice.config import ConfigError, GridSpec, RunConfig, build_config, parse_config_text
from jclattice.ramp import RampPlan, RampSchedule
from jclattice.sweeps import (
    FidelityGrid,
    combine_max_fidelity,
    prepare_context,
    read_grid_csv,
    run_phase_diagram,
    run_ramp,
    run_rho1_map,
    run_rj_sweep,
    write_grid_csv,
)

T22 = 2 * math.pi


def small_cfg(**overrides) -> RunConfig:
    cfg = RunConfig()
    cfg.sites = cfg.excitations = 2
    cfg.plan = RampPlan(RampSchedule(1.0, 1.0), RampSchedule(0.0, 0.4),
                        RampSchedule(0.0, 0.0), T22)
    cfg.steps = 800
    cfg.tol = 1e-4
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def test_config_parsing_round_trip(tmp_path):
    text = """
# comment
L = 2
N = 2
T = 2pi            # inline comment
JT = 0.4
rJ_values = 0.5, 1, 2
dissipation = on
kappa = 1e-3
"""
    raw = parse_config_text(text, "inline")
    cfg = build_config(raw)
    assert cfg.sites == 2
    assert cfg.plan.total_time == pytest.approx(2 * math.pi)
    assert cfg.rj_values == (0.5, 1.0, 2.0)
    assert cfg.dissipation and cfg.kappa == 1e-3


def test_config_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match=":3"):
        parse_config_text("L = 2\nN = 2\nbogus = 1\n", "f")
    with pytest.raises(ConfigError, match=":2"):
        parse_config_text("L = 2\nno equals sign here\n", "f")
    with pytest.raises(ConfigError):
        build_config(parse_config_text("init = weird\n", "f"))


def test_physical_unit_conversion():
    raw = parse_config_text(
        "g_hz = 200e6\nkappa_hz = 200e3\ngamma_hz = 2e3\nT_seconds = 37.5e-9\n",
        "f",
    )
    cfg = build_config(raw)
    assert cfg.kappa == pytest.approx(1e-3)
    assert cfg.gamma == pytest.approx(1e-5)
    # 2 pi * 200 MHz * 37.5 ns = 15 pi
    assert cfg.plan.total_time == pytest.approx(15 * math.pi)


def test_run_ramp_stationary_target(tmp_path):
    cfg = small_cfg()
    cfg.plan = RampPlan(RampSchedule(1.0, 1.0), RampSchedule(0.4, 0.4),
                        RampSchedule(0.0, 0.0), T22)
    cfg.init = "file"
    ctx_probe = prepare_context(small_cfg())  # table for the state file
    from jclattice.spectrum import ground_state

    gs = ground_state(ctx_probe.templates.assemble_copy(1.0, 0.4, 0.0))
    state_path = tmp_path / "init.npy"
    np.save(state_path, gs.vector.astype(complex))
    cfg.init_file = str(state_path)
    summary = run_ramp(cfg)
    assert summary.fidelity_raw > 1 - 1e-8


def test_run_ramp_no_ramp_is_stationary():
    # Mott start with J(T) = J(0) = 0: the initial state is the exact ground
    cfg = small_cfg()
    cfg.plan = RampPlan(RampSchedule(1.0, 1.0), RampSchedule(0.0, 0.0),
                        RampSchedule(0.0, 0.0), T22)
    cfg.tol = 1e-8
    summary = run_ramp(cfg)
    assert summary.fidelity_raw > 1 - 1e-8


def test_run_ramp_csv_schema(tmp_path):
    cfg = small_cfg(checkpoints=3, out=str(tmp_path / "ramp.csv"))
    summary = run_ramp(cfg)
    lines = (tmp_path / "ramp.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header == ["t", "g", "J", "Delta", "norm",
                      "overlap_with_instantaneous_ground", "symmetric_weight"]
    assert len([l for l in lines if not l.startswith("#")]) == 4
    assert lines[-1].startswith("# summary F=")
    assert 0.0 <= summary.fidelity_raw <= 1 + 1e-9


def test_phase_diagram_grid_and_determinism(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    cfg = small_cfg(jt_grid=GridSpec(0.0, 0.4, 2), dt_grid=GridSpec(-0.2, 0.2, 2))
    cfg.out = str(out1)
    grid1 = run_phase_diagram(cfg)
    cfg.out = str(out2)
    grid2 = run_phase_diagram(cfg)
    assert out1.read_bytes() == out2.read_bytes()
    assert np.array_equal(grid1.fidelity, grid2.fidelity)
    assert grid1.fidelity.shape == (2, 2)
    assert (grid1.fidelity <= 1 + 1e-9).all()


def test_phase_diagram_resume_byte_identical(tmp_path):
    out_full = tmp_path / "full.csv"
    cfg = small_cfg(jt_grid=GridSpec(0.0, 0.4, 3), dt_grid=GridSpec(0.0, 0.2, 2))
    cfg.out = str(out_full)
    run_phase_diagram(cfg)

    # simulate an interrupted run: journal holds a prefix of the points
    out_res = tmp_path / "res.csv"
    cfg.out = str(out_res)
    ctx = prepare_context(cfg)
    from jclattice.sweeps import _grid_point, _POOL_CONTEXT

    _POOL_CONTEXT["ctx"] = ctx
    try:
        partial = [_grid_point((i, jt, dt)) for i, (jt, dt) in
                   [(0, (0.0, 0.0)), (3, (0.2, 0.2))]]
    finally:
        _POOL_CONTEXT.pop("ctx")
    journal = out_res.with_suffix(".csv.progress")
    journal.write_text("".join(f"{i},{f!r}\n" for i, f in partial))
    run_phase_diagram(cfg, resume=True)
    assert out_res.read_bytes() == out_full.read_bytes()
    assert not journal.exists()


def test_phase_diagram_threads_match_serial(tmp_path):
    cfg = small_cfg(jt_grid=GridSpec(0.0, 0.4, 2), dt_grid=GridSpec(0.0, 0.2, 2))
    cfg.out = str(tmp_path / "s.csv")
    serial = run_phase_diagram(cfg)
    cfg.out = str(tmp_path / "p.csv")
    pooled = run_phase_diagram(cfg, threads=2)
    assert np.array_equal(serial.fidelity, pooled.fidelity)
    assert (tmp_path / "s.csv").read_bytes() == (tmp_path / "p.csv").read_bytes()


def test_rj_sweep_single_point_matches_ramp():
    cfg = small_cfg(rj_values=(1.0,))
    sweep = run_rj_sweep(cfg)
    direct = run_ramp(small_cfg())
    assert sweep.fidelities[0] == pytest.approx(direct.fidelity_raw, abs=1e-12)
    assert sweep.best_rj == 1.0


def test_combine_max_identity_and_monotonicity():
    rng = np.random.default_rng(5)
    axes = dict(axis_names=("JT", "dT"), axis1=(0.0, 0.5), axis2=(-0.5, 0.5))
    grids = [FidelityGrid(fidelity=rng.uniform(size=(2, 2)), **axes)
             for _ in range(3)]
    single = combine_max_fidelity(grids[:1])
    assert np.array_equal(single.fidelity, grids[0].fidelity)
    two = combine_max_fidelity(grids[:2])
    all3 = combine_max_fidelity(grids)
    assert (two.fidelity <= all3.fidelity + 1e-15).all()
    assert all3.provenance.shape == (2, 2)


def test_combine_max_axis_mismatch():
    a = FidelityGrid(("JT", "dT"), (0.0,), (0.0,), np.ones((1, 1)))
    b = FidelityGrid(("JT", "dT"), (0.1,), (0.0,), np.ones((1, 1)))
    with pytest.raises(ValueError):
        combine_max_fidelity([a, b])


def test_grid_csv_round_trip(tmp_path):
    grid = FidelityGrid(("JT", "dT"), (0.0, 0.25), (-0.5, 0.5),
                        np.array([[0.1, 0.9], [0.4, 1.0]]))
    path = tmp_path / "g.csv"
    write_grid_csv(path, grid)
    back = read_grid_csv(path)
    assert back.axis1 == grid.axis1
    assert np.allclose(back.fidelity, grid.fidelity)


def test_rho1_map_small(tmp_path):
    cfg = small_cfg(j_grid=GridSpec(0.0, 0.4, 3), d_grid=GridSpec(-0.5, 0.5, 2),
                    rho_i=1, rho_j=2, out=str(tmp_path / "rho.csv"))
    rows = run_rho1_map(cfg)
    assert len(rows) == 6
    by_j = {}
    for j_val, d_val, r in rows:
        assert abs(r) < 1.001
        by_j.setdefault(d_val, []).append(r)
        if j_val == 0.0:
            assert abs(r) < 1e-10
    for d_val, series in by_j.items():
        assert all(np.diff(series) > -1e-12)  # nondecreasing in J


def test_rho1_diagonal_normalization():
    cfg = small_cfg(j_grid=GridSpec(0.3, 0.3, 1), d_grid=GridSpec(0.0, 0.0, 1),
                    rho_i=1, rho_j=1)
    rows = run_rho1_map(cfg)
    assert rows[0][2] == pytest.approx(1.0, abs=1e-12)


def cli_config(tmp_path, extra=""):
    path = tmp_path / "run.cfg"
    path.write_text(
        "L = 2\nN = 2\nT = 2pi\nJT = 0.4\nsteps = 600\ntol = 1e-3\n" + extra
    )
    return path


def test_cli_ramp_and_exit_codes(tmp_path, capsys):
    cfg = cli_config(tmp_path)
    assert main(["ramp", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "F=" in out

    missing = main(["ramp", "--config", str(tmp_path / "nope.cfg")])
    assert missing == 2

    bad = tmp_path / "bad.cfg"
    bad.write_text("L = 2\nwhat = ever\n")
    assert main(["ramp", "--config", str(bad)]) == 2


def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    # g = J = 0 collapses the sector spectrum to a single degenerate level
    cfg = tmp_path / "degen.cfg"
    cfg.write_text("L = 2\nN = 1\ng0 = 0\ngT = 0\nJ0 = 0\nJT = 0\nT = 1\n"
                   "resolution = 16\nout = gap.csv\n")
    code = main(["gap-scan", "--config", str(cfg)])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_basis_and_spectrum_and_gap(tmp_path, capsys):
    cfg = cli_config(tmp_path, "resolution = 16\ncount = 3\n")
    assert main(["basis", "--config", str(cfg), "--out",
                 str(tmp_path / "basis.txt")]) == 0
    text = (tmp_path / "basis.txt").read_text()
    assert text.startswith("# L=2 N=2 dim=8\n")

    assert main(["spectrum", "--config", str(cfg), "--out",
                 str(tmp_path / "spec.csv")]) == 0
    header = (tmp_path / "spec.csv").read_text().splitlines()[0]
    assert header == "s,g,J,Delta,level,energy_above_ground,symmetric_weight"

    assert main(["gap-scan", "--config", str(cfg), "--out",
                 str(tmp_path / "gap.csv")]) == 0
    lines = (tmp_path / "gap.csv").read_text().splitlines()
    assert lines[0] == "s,g,J,Delta,E_gap_symmetric,E_gap_any"
    assert lines[-1].startswith("# refined minimum")


def test_cli_phase_diagram_and_combine(tmp_path):
    cfg1 = cli_config(
        tmp_path,
        "JT_min = 0\nJT_max = 0.4\nJT_points = 2\n"
        "dT_min = 0\ndT_max = 0.2\ndT_points = 2\nout = g1.csv\n",
    )
    assert main(["phase-diagram", "--config", str(cfg1), "--out",
                 str(tmp_path / "g1.csv")]) == 0
    cfg2 = tmp_path / "run2.cfg"
    cfg2.write_text(cfg1.read_text().replace("JT = 0.4", "JT = 0.4\nrJ = 2"))
    assert main(["phase-diagram", "--config", str(cfg2), "--out",
                 str(tmp_path / "g2.csv")]) == 0
    assert main(["combine-max", str(tmp_path / "g1.csv"), str(tmp_path / "g2.csv"),
                 "--out", str(tmp_path / "max.csv")]) == 0
    combined = read_grid_csv(tmp_path / "max.csv")
    g1 = read_grid_csv(tmp_path / "g1.csv")
    assert (combined.fidelity >= g1.fidelity - 1e-15).all()


def test_cli_init_pulse(tmp_path):
    cfg = cli_config(tmp_path, "pulse = sf\neps = 0.05\ng_d = 0.05\npulse_N = 3\n")
    assert main(["init-pulse", "--config", str(cfg), "--out",
                 str(tmp_path / "pulse.csv")]) == 0
    lines = (tmp_path / "pulse.csv").read_text().splitlines()
    assert lines[0] == "l,type,duration,cumulative_fidelity"
    assert len([l for l in lines if not l.startswith("#")]) == 7  # header + 6 segments
