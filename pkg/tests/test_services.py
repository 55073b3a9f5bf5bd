import pytest
from helpers.factories import MeasurementFactory, well_conditioned_quaternion

from wahbakit.application.campaign import CampaignService, study_filename
from wahbakit.application.solve import COMPARE_ORDER, SolveService
from wahbakit.config.settings import Settings
from wahbakit.domain.errors import NearSingularError, NoConvergenceError
from wahbakit.domain.simulation import CampaignConfig, NoiseSpec
from wahbakit.domain.solvers import SolverMethod
from wahbakit.domain.solvers import solve as direct_solve


@pytest.fixture
def settings():
    return Settings(_env_file=None, chunk_size=25)


@pytest.fixture
def meas(rng):
    return MeasurementFactory.noisy(rng, (1.0, 1.0), q_true=well_conditioned_quaternion(rng))


def test_solve_service_uses_settings_limits(settings, meas):
    tight = Settings(_env_file=None, recursive_max_iter=1)
    with pytest.raises(NoConvergenceError):
        SolveService(tight).solve(meas, SolverMethod.recursive)
    report = SolveService(settings).solve(meas, "recursive")
    assert report.method is SolverMethod.recursive


def test_explicit_arguments_override_settings(meas):
    service = SolveService(Settings(_env_file=None, recursive_max_iter=1))
    assert service.solve(meas, SolverMethod.recursive, max_iter=8).iterations > 1


def test_load_renormalizes_on_request(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("bx,by,bz,rx,ry,rz,w\n2,0,0,1,0,0,1\n0,3,0,0,1,0,1\n", encoding="utf-8")
    meas = SolveService(Settings(_env_file=None)).load(path, renormalize=True)
    assert meas.body.tolist() == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]


def test_compare_marks_oracle_failure(settings, meas, monkeypatch):
    def failing_oracle(sys, method, tol=None, max_iter=None):
        if method is SolverMethod.q_method:
            raise NearSingularError("искусственный отказ")
        return direct_solve(sys, method, tol=tol, max_iter=max_iter)

    monkeypatch.setattr("wahbakit.application.solve.solve", failing_oracle)
    rows, oracle_ok = SolveService(settings).compare(meas)
    assert not oracle_ok
    assert [row.method for row in rows] == [m.value for m in COMPARE_ORDER]
    assert rows[0].error.startswith("NearSingular")
    assert all(row.gap is None for row in rows)
    assert rows[1].eigenvalue is not None


def test_compare_gaps_are_relative_to_q_method(settings, meas):
    rows, oracle_ok = SolveService(settings).compare(meas)
    assert oracle_ok
    assert rows[0].gap == 0.0
    assert list(rows[0].as_dict()) == [
        "method", "lambda", "gap", "iterations", "residual", "taste", "wall_time_ns", "error",
    ]
    assert all(row.wall_time_ns >= 0 for row in rows)


def test_campaign_service_runs_with_settings_workers(settings):
    config = CampaignConfig(n_trials=100, noise=NoiseSpec(sigma1_deg=0.5, sigma2_deg=0.5), rho_h=10, seed=3)
    serial = CampaignService(settings).run(config)
    parallel = CampaignService(Settings(_env_file=None, chunk_size=25, workers=3)).run(config)
    assert serial.histogram.counts.tolist() == parallel.histogram.counts.tolist()


def test_study_covers_six_pairs(settings, tmp_path):
    service = CampaignService(settings)
    results = service.study(seed=8, n_trials=20, rho_h=10)
    assert [r.config.noise.sigmas_deg for r in results] == [
        (0.1, 0.1), (0.1, 0.5), (0.1, 1.0), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0),
    ]
    paths = service.write_study(results, tmp_path)
    assert paths[0].name == "hist_s1_0.1_s2_0.1.csv"
    assert all(p.exists() for p in paths)
    assert study_filename(results[-1].config, "json") == "hist_s1_1_s2_1.json"
