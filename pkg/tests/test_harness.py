import csv
import io
import math

import numpy as np
import pytest

from hdg_voigt import harness
from hdg_voigt.harness import (CSV_HEADER, ConvergenceReport, Gate, StudyConfig, convergence_gates,
                               observed_order, run_convergence, run_convergence_options, run_nu_sweep,
                               run_tau_sweep, tau_gates)


@pytest.fixture(scope="module")
def small_report():
    return run_convergence(StudyConfig(elem="tri", degree=1, levels=(2, 4, 8)))


def test_config_normalisation():
    c = StudyConfig(pattern="single-diagonal", plane="stress", postprocess="boundary_trace_curl")
    assert c.pattern == "single_diagonal" and c.plane == "plane_stress" and c.postprocess == "opt3"
    assert StudyConfig(levels=["4", "8"]).levels == (4, 8)


@pytest.mark.parametrize("kw", [dict(case="nope"), dict(elem="hex"), dict(pattern="zigzag"), dict(degree=4),
                                dict(levels=(4,)), dict(levels=(0, 4)), dict(tau=0.0), dict(tau=-1.0),
                                dict(postprocess="opt7"), dict(plane="shell")])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        StudyConfig(**kw)


def test_observed_order():
    assert observed_order(1.0, 0.25, 0.5, 0.25) == pytest.approx(2.0)
    assert math.isnan(observed_order(0.0, 1.0, 0.5, 0.25))


def test_csv_header_and_eocs_rederivable(small_report):
    rows = list(csv.reader(io.StringIO(small_report.to_csv())))
    assert tuple(rows[0]) == CSV_HEADER
    data = [[float(v) for v in r] for r in rows[1:]]
    assert [int(r[0]) for r in data] == [2, 4, 8]
    for prev, cur in zip(data, data[1:]):
        for e, o in ((3, 6), (4, 7), (5, 8)):
            ref = math.log(prev[e] / cur[e]) / math.log(prev[1] / cur[1])
            assert cur[o] == pytest.approx(ref, rel=1e-14)
    assert all(math.isnan(v) for v in data[0][6:])


def test_csv_deterministic(small_report, tmp_path):
    again = run_convergence(StudyConfig(elem="tri", degree=1, levels=(2, 4, 8), out=str(tmp_path / "r.csv")))
    assert again.to_csv() == small_report.to_csv()
    assert (tmp_path / "r.csv").read_bytes() == small_report.to_csv().encode()


def test_options_share_solve():
    reps = run_convergence_options(StudyConfig(degree=1, levels=(2, 4)))
    assert set(reps) == {"opt1", "opt2", "opt3"}
    eu = {o: tuple(r.column("err_u")) for o, r in reps.items()}
    assert eu["opt1"] == eu["opt2"] == eu["opt3"]
    assert all(r.max_constraint_residual <= 1e-10 for r in reps.values())


def test_gates_report_failures(small_report):
    gates = convergence_gates(small_report)
    assert all(isinstance(g, Gate) for g in gates)
    assert any(g.name.startswith("EOC_u*") for g in gates)
    for g in gates:
        assert g.line().startswith("PASS" if g.passed else "FAIL")


def test_aborted_level_fails_gate():
    rep = ConvergenceReport(StudyConfig(levels=(2, 4)))
    rep.add(2, 0.5, 8, 1e-2, 1e-2, 1e-3)
    rep.failures.append((4, "boom"))
    rep.add(4, 0.25, 0, math.nan, math.nan, math.nan)
    gates = convergence_gates(rep)
    assert not all(g.passed for g in gates)
    assert any(g.name.startswith("levels") and not g.passed for g in gates)


def test_solver_failure_recorded(monkeypatch):
    from hdg_voigt.solver import SolverError

    def boom(*a, **k):
        raise SolverError("forced")
    monkeypatch.setattr(harness, "solve_hdg", boom)
    rep = run_convergence(StudyConfig(levels=(2, 4)))
    assert [n for n, _ in rep.failures] == [2, 4]
    assert np.isnan(rep.column("err_u")).all()


def test_tau_sweep(tmp_path):
    sweep = run_tau_sweep(StudyConfig(degree=1, levels=(2, 4), out=str(tmp_path / "t.csv")), (1.0, 3.0, 10.0))
    assert sweep.n == 4 and len(sweep.rows) == 3
    assert sweep.argmin("err_u") in (1.0, 3.0, 10.0)
    assert (tmp_path / "t.csv").read_text().startswith("tau,err_u,err_L,err_ustar\n")
    assert len(tau_gates(sweep)) == 2


def test_nu_sweep_files(tmp_path):
    cfg = StudyConfig(case="incompressible2d", elem="tri", pattern="single_diagonal", degree=1,
                      levels=(2, 4), out=str(tmp_path / "nu.csv"))
    reps = run_nu_sweep(cfg, (0.49, 0.499))
    assert set(reps) == {0.49, 0.499}
    assert (tmp_path / "nu_nu0.49.csv").exists() and (tmp_path / "nu_nu0.499.csv").exists()
    assert harness.nu_spread(reps) < 5.0
    assert any(g.name.startswith("e_u spread") or "spread" in g.name for g in harness.nu_gates(reps))


def test_vtk_output(tmp_path):
    run_convergence(StudyConfig(elem="quad", degree=2, levels=(2, 3), vtk_dir=str(tmp_path)))
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["sinusoidal2d_quad_k2_n2.vtk", "sinusoidal2d_quad_k2_n3.vtk"]
    text = (tmp_path / files[0]).read_text()
    assert "CELL_TYPES 4" in text and "VECTORS displacement double" in text and "von_mises" in text
