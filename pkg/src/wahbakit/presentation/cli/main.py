"""Командная строка wahba-kit: solve, compare, simulate, density.

Коды выхода: 0 успех, 1 ошибка ввода или конфигурации, 2 численный отказ.
В stdout только результаты, диагностика идёт в stderr.
"""
import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import asdict
from pathlib import Path

from pydantic import ValidationError

from wahbakit.application.campaign import CampaignService
from wahbakit.application.solve import SolveService
from wahbakit.config.logging import configure_logging
from wahbakit.config.settings import LOG_LEVELS, Settings, get_settings
from wahbakit.domain.errors import ConfigError, InputError, WahbaKitError
from wahbakit.domain.simulation import CampaignConfig, ErrorMetric, NoiseSpec
from wahbakit.domain.solvers import SolverMethod
from wahbakit.infrastructure.io.histograms import histogram_writer_for, write_text
from wahbakit.infrastructure.io.reports import report_writer_for
from wahbakit.presentation.cli.schemas import (
    CompareRequest,
    DensityRequest,
    SimulateRequest,
    SolveRequest,
)

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wahba-kit", description="Решатели задачи Вахбы и испытания Монте-Карло")
    parser.add_argument(
        "--log-level", type=str.upper, choices=LOG_LEVELS, default=None, help="Перекрывает WAHBA_KIT_LOG_LEVEL"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Оценить ориентацию по файлу измерений")
    solve.add_argument("input", type=Path)
    solve.add_argument("--method", choices=[m.value for m in SolverMethod], default=SolverMethod.recursive.value)
    _add_solver_options(solve)

    compare = sub.add_parser("compare", help="Запустить все решатели на одном наборе")
    compare.add_argument("input", type=Path)
    _add_solver_options(compare)

    simulate = sub.add_parser("simulate", help="Гистограмма ошибки первого порядка")
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("--study", action="store_true", help="Шесть пар σ исследования")
    simulate.add_argument("--sigma1", type=float, default=None, help="σ₁, градусы")
    simulate.add_argument("--sigma2", type=float, default=None, help="σ₂, градусы")
    simulate.add_argument("--trials", type=int, default=10_000)
    simulate.add_argument("--rho-h", type=int, default=100, help="Испытаний на бин")
    simulate.add_argument("--w1", type=float, default=1.0)
    simulate.add_argument("--w2", type=float, default=1.0)
    simulate.add_argument("--taste-gate", type=float, default=None)
    simulate.add_argument("--metric", choices=[m.value for m in ErrorMetric], default=ErrorMetric.eigen_gap.value)
    simulate.add_argument("--workers", type=int, default=None, help="По умолчанию WAHBA_KIT_WORKERS")
    simulate.add_argument("--format", choices=["csv", "json"], default="csv")
    target = simulate.add_mutually_exclusive_group()
    target.add_argument("--output", type=Path, default=None)
    target.add_argument("--output-dir", type=Path, default=Path("."))

    density = sub.add_parser("density", help="Восстановление гауссианы при разных ρ_H")
    density.add_argument("--seed", type=int, required=True)
    density.add_argument("--samples", type=int, default=100_000)
    density.add_argument("--rho-h", type=int, nargs="+", default=[10, 30, 100, 300, 1000])
    density.add_argument("--format", choices=["json", "csv"], default="json")
    density.add_argument("--output", type=Path, default=None)
    return parser


def _add_solver_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=None, help="Допуск по λ, по умолчанию tol_scale·λ₀")
    parser.add_argument("--max-iter", type=int, default=None)
    parser.add_argument("--renormalize", action="store_true", help="Нормировать входные векторы")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--output", type=Path, default=None)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        write_text(output, text)


def _run_solve(args: argparse.Namespace, settings: Settings) -> int:
    request = SolveRequest.model_validate(vars(args))
    service = SolveService(settings)
    meas = service.load(request.input, renormalize=request.renormalize)
    report = service.solve(meas, request.method, tol=request.tol, max_iter=request.max_iter)
    _emit(report_writer_for(request.format).render_report(report), request.output)
    return 0


def _run_compare(args: argparse.Namespace, settings: Settings) -> int:
    request = CompareRequest.model_validate(vars(args))
    service = SolveService(settings)
    meas = service.load(request.input, renormalize=request.renormalize)
    rows, oracle_ok = service.compare(meas, tol=request.tol, max_iter=request.max_iter)
    _emit(report_writer_for(request.format).render_rows([row.as_dict() for row in rows]), request.output)
    if not oracle_ok:
        print(rows[0].error, file=sys.stderr)
        return 2
    return 0


def _run_simulate(args: argparse.Namespace, settings: Settings) -> int:
    request = SimulateRequest.model_validate(vars(args))
    service = CampaignService(settings)
    if request.study:
        results = service.study(
            seed=request.seed,
            n_trials=request.trials,
            rho_h=request.rho_h,
            weights=(request.w1, request.w2),
            taste_gate=request.taste_gate,
            error_metric=request.metric,
            workers=request.workers,
        )
        for path in service.write_study(results, request.output_dir, request.format):
            logger.info("Записан %s", path)
        return 0

    assert request.sigma1 is not None and request.sigma2 is not None
    config = CampaignConfig(
        n_trials=request.trials,
        noise=NoiseSpec(sigma1_deg=request.sigma1, sigma2_deg=request.sigma2),
        rho_h=request.rho_h,
        seed=request.seed,
        weights=(request.w1, request.w2),
        taste_gate=request.taste_gate,
        error_metric=request.metric,
    )
    result = service.run(config, workers=request.workers)
    if request.output is None:
        sys.stdout.write(histogram_writer_for(request.format).render(result.histogram, config))
    else:
        service.write(result, request.output, request.format)
    return 0


def _run_density(args: argparse.Namespace, settings: Settings) -> int:
    request = DensityRequest.model_validate(vars(args))
    points = CampaignService(settings).density(request.samples, request.rho_h, request.seed)
    rows = [asdict(point) for point in points]
    _emit(report_writer_for(request.format).render_rows(rows), request.output)
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "solve": _run_solve,
    "compare": _run_compare,
    "simulate": _run_simulate,
    "density": _run_density,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        try:
            settings = get_settings()
        except ValidationError as e:
            raise ConfigError(f"Некорректные переменные WAHBA_KIT_*: {e.error_count()} ошибок\n{e}") from e
        configure_logging(args.log_level or settings.log_level, settings.log_json)
        return COMMANDS[args.command](args, settings)
    except WahbaKitError as e:
        logger.debug("Отказ команды", exc_info=True)
        print(f"{e.code}: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"InputError: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
