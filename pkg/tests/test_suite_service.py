import math

import pytest

from app.repositories.run_repository import META_FILE, PLOTS_FILE, REPORT_FILE, SERIES_FILE, VERDICTS_FILE
from app.schemas.grid import GridMode, GridSpec
from app.schemas.params import ProblemParams
from app.schemas.run import DataSlot, DataSpec, KernelSuiteConfig, LinearSuiteConfig, RunConfig, StepperConfig
from app.schemas.series import RUN_COLUMNS
from app.services.suite_service import REGION_FILE, build_data

SMALL_7D = GridSpec(mode=GridMode.RADIAL, n=7, points=128, extent=40.0)
SMALL_3D = GridSpec(mode=GridMode.RADIAL, n=3, points=128, extent=40.0)


def _run_config(params: ProblemParams) -> RunConfig:
    return RunConfig(params=params, grid=SMALL_7D, horizon=2.0, stepper=StepperConfig(h=0.2))


def test_build_data_fills_selected_slots():
    u0, u1, v0, v1 = build_data(SMALL_3D, DataSpec(amplitude=0.5, slots=[DataSlot.U1, DataSlot.V0]))
    assert u0.values.max() == 0.0
    assert u1.values.max() == pytest.approx(0.5)
    assert v0.values.max() == pytest.approx(0.5)
    assert v1.values.max() == 0.0


def test_admissibility_response(service, loss_params, none_params):
    response, verdict = service.admissibility(loss_params)
    assert verdict.scenario.value == "Thm11_loss"
    assert response.rates.u.rate_lq == pytest.approx(-1.125)
    assert response.weights["u_d2sigma"] == pytest.approx(-2.125)

    response, verdict = service.admissibility(none_params)
    assert not verdict.applies
    assert response.rates is None
    assert response.weights is None


def test_check_writes_run_directory(service, loss_params):
    run_dir, verdicts = service.check(RunConfig(params=loss_params))
    for name in (META_FILE, VERDICTS_FILE, REPORT_FILE, PLOTS_FILE):
        assert (run_dir / name).is_file()
    assert not (run_dir / SERIES_FILE).exists()
    assert verdicts["verdict"]["scenario"] == "Thm11_loss"
    assert verdicts["verdict"]["eps_p1_sigma2"] == 0.0
    assert verdicts["gn_exponents"]["v_lmp1"] == pytest.approx(-14.5)

    meta = service.repo.read_meta(run_dir)
    assert meta["command"] == "check"
    assert meta["scenario"] == "Thm11_loss"
    assert meta["constants"]["threshold1"] == pytest.approx(9.0)
    assert set(meta["versions"]) >= {"numpy", "scipy", "pydantic"}
    assert service.repo.read_verdicts(run_dir) == verdicts

    report = (run_dir / REPORT_FILE).read_text()
    assert report.startswith("# check report (generated ")
    assert "Thm11_loss" in report
    assert "no data" in report
    assert "# no data" in (run_dir / PLOTS_FILE).read_text()


def test_check_honours_explicit_output_dir(service, loss_params, tmp_path):
    target = tmp_path / "explicit"
    run_dir, _ = service.check(RunConfig(params=loss_params), out=str(target))
    assert run_dir == target


def test_check_without_params_is_rejected(service):
    with pytest.raises(ValueError):
        service.check(RunConfig())


def test_scan_writes_region_file(service):
    run_dir, verdicts = service.scan(RunConfig())
    assert verdicts["scan"]["total"] == 1800
    assert sum(verdicts["scan"]["counts"].values()) == 1800
    lines = (run_dir / REGION_FILE).read_text().splitlines()
    assert lines[0].startswith("n,m,q,sigma1,sigma2,p1,p2,scenario")
    assert len(lines) == 1801
    assert "Tuples classified: 1800" in (run_dir / REPORT_FILE).read_text()


def test_run_is_deterministic_and_reported(service, loss_params):
    cfg = _run_config(loss_params)
    first_dir, verdicts = service.run(cfg)
    second_dir, again = service.run(cfg)

    assert verdicts == again
    assert (first_dir / SERIES_FILE).read_bytes() == (second_dir / SERIES_FILE).read_bytes()
    first_report = (first_dir / REPORT_FILE).read_text().splitlines()
    second_report = (second_dir / REPORT_FILE).read_text().splitlines()
    assert first_report[1:] == second_report[1:]

    series = service.repo.read_series(first_dir)
    assert series.column_names == list(RUN_COLUMNS)
    assert series.times[0] == 0.0
    assert series.times[-1] == 2.0
    assert not verdicts["blow_up"]
    assert len(verdicts["envelopes"]) == 8
    assert len(verdicts["gn_envelopes"]) == 4

    report = "\n".join(first_report)
    assert repr(verdicts["x_norm"]["at_horizon"]) in report
    assert repr(verdicts["max_boundary_mass"]) in report


def test_run_writes_final_snapshots(service, loss_params):
    run_dir, _ = service.run(_run_config(loss_params))
    for name in ("u_final", "v_final"):
        snapshot = service.repo.read_snapshot(run_dir, name)
        assert snapshot.spec == SMALL_7D
        assert snapshot.values.shape == (128,)


def test_run_without_admissible_result_still_records(service):
    params = ProblemParams(n=7, sigma1=1, sigma2=1, p1=2, p2=2, q=2, m=1)
    run_dir, verdicts = service.run(_run_config(params))
    assert verdicts["verdict"]["scenario"] == "none"
    assert "x_norm" not in verdicts
    assert any("envelope checks skipped" in w for w in verdicts["warnings"])
    assert len(service.repo.read_series(run_dir)) > 2


def test_report_can_be_rebuilt(service, loss_params):
    run_dir, _ = service.check(RunConfig(params=loss_params))
    (run_dir / REPORT_FILE).unlink()
    assert service.report(run_dir) == run_dir / REPORT_FILE
    assert (run_dir / REPORT_FILE).read_text().startswith("# check report")


def test_kernel_command(service):
    cfg = RunConfig(
        kernel_suite=KernelSuiteConfig(n=3, sigma=1.0, a_values=[0.0], r_values=[math.inf], t_min=10.0, t_max=100.0, samples=9)
    )
    run_dir, verdicts = service.kernel(cfg)
    assert len(verdicts["kernel"]) == 1
    assert verdicts["kernel"][0]["majorant_slope"] is not None
    series = service.repo.read_series(run_dir)
    assert series.column_names == ["k1_a0_rinf"]
    assert len(series) == 9
    assert "## Kernel norms" in (run_dir / REPORT_FILE).read_text()


def test_linear_command(service):
    cfg = RunConfig(grid=SMALL_3D, horizon=10.0, linear_suite=LinearSuiteConfig(n=3, sigmas=[1.0]))
    run_dir, verdicts = service.linear(cfg)
    assert len(verdicts["linear"]) == 1
    assert len(verdicts["linear"][0]["envelopes"]) == 8
    series = service.repo.read_series(run_dir)
    assert "s1_w0_w_d0sigma" in series.column_names
    assert "s1_w1_w_t" in series.column_names
    assert "## Linear estimates, sigma = 1.0" in (run_dir / REPORT_FILE).read_text()


def test_picard_command(service):
    params = ProblemParams(n=3, sigma1=1, sigma2=1, p1=2, p2=2, q=2, m=1)
    cfg = RunConfig(
        params=params,
        grid=SMALL_3D,
        horizon=1.0,
        data=DataSpec(amplitude=0.05),
        stepper=StepperConfig(h=0.1, picard_max_iters=3, picard_tol=0.0),
    )
    run_dir, verdicts = service.picard(cfg)
    picard = verdicts["picard"]
    assert picard["iterations"] == 3
    assert len(picard["distances"]) == 3
    assert "## Picard iteration" in (run_dir / REPORT_FILE).read_text()
