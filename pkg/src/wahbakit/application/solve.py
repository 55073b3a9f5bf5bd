import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from wahbakit.config.settings import Settings, get_settings
from wahbakit.domain.davenport import DavenportSystem, build_system
from wahbakit.domain.errors import NumericalError
from wahbakit.domain.measurements import MeasurementSet
from wahbakit.domain.solvers import SolveReport, SolverMethod, default_tol, solve
from wahbakit.infrastructure.io.measurements import reader_for

logger = logging.getLogger(__name__)

COMPARE_ORDER = (
    SolverMethod.q_method,
    SolverMethod.quest,
    SolverMethod.first_order,
    SolverMethod.recursive,
    SolverMethod.zeroth_order,
)


@dataclass(frozen=True, slots=True)
class CompareRow:
    method: str
    eigenvalue: float | None
    gap: float | None
    iterations: int | None
    residual: float | None
    taste: float | None
    wall_time_ns: int
    error: str | None = None

    def as_dict(self) -> dict:
        data = asdict(self)
        data["lambda"] = data.pop("eigenvalue")
        return {key: data[key] for key in ("method", "lambda", "gap", "iterations", "residual", "taste", "wall_time_ns", "error")}


class SolveService:
    def __init__(self, settings: Settings | None = None):
        self.settings = settings or get_settings()

    def load(self, path: Path, renormalize: bool = False) -> MeasurementSet:
        meas = reader_for(path).read(path)
        if renormalize:
            return meas.normalized()
        meas.validate()
        return meas

    def _tolerance(self, sys: DavenportSystem, tol: float | None) -> float:
        return tol if tol is not None else default_tol(sys, self.settings.tol_scale)

    def _max_iter(self, method: SolverMethod, max_iter: int | None) -> int | None:
        if max_iter is not None:
            return max_iter
        if method is SolverMethod.quest:
            return self.settings.quest_max_iter
        if method is SolverMethod.recursive:
            return self.settings.recursive_max_iter
        return None

    def solve(
        self,
        meas: MeasurementSet,
        method: SolverMethod | str = SolverMethod.recursive,
        tol: float | None = None,
        max_iter: int | None = None,
    ) -> SolveReport:
        method = SolverMethod(method)
        sys = build_system(meas)
        report = solve(sys, method, tol=self._tolerance(sys, tol), max_iter=self._max_iter(method, max_iter))
        logger.debug(
            "%s: λ = %.17g за %d итераций",
            method.value,
            report.eigenvalue,
            report.iterations,
            extra={"residual": report.residual},
        )
        return report

    def compare(
        self, meas: MeasurementSet, tol: float | None = None, max_iter: int | None = None
    ) -> tuple[list[CompareRow], bool]:
        """Все решатели на одном наборе; отказ метода фиксируется в строке.

        Returns:
            (строки в порядке COMPARE_ORDER, успешен ли оракул q-method)
        """
        sys = build_system(meas)
        rows: list[CompareRow] = []
        oracle_lambda: float | None = None
        for method in COMPARE_ORDER:
            started = time.perf_counter_ns()
            try:
                report = solve(
                    sys, method, tol=self._tolerance(sys, tol), max_iter=self._max_iter(method, max_iter)
                )
            except NumericalError as e:
                elapsed = time.perf_counter_ns() - started
                logger.warning("%s: %s", method.value, e, extra={"code": e.code})
                rows.append(
                    CompareRow(
                        method=method.value,
                        eigenvalue=None,
                        gap=None,
                        iterations=None,
                        residual=None,
                        taste=None,
                        wall_time_ns=elapsed,
                        error=f"{e.code}: {e}",
                    )
                )
                continue
            elapsed = time.perf_counter_ns() - started
            if method is SolverMethod.q_method:
                oracle_lambda = report.eigenvalue
            rows.append(
                CompareRow(
                    method=method.value,
                    eigenvalue=report.eigenvalue,
                    gap=None if oracle_lambda is None else abs(report.eigenvalue - oracle_lambda),
                    iterations=report.iterations,
                    residual=report.residual,
                    taste=report.taste,
                    wall_time_ns=elapsed,
                )
            )
        return rows, oracle_lambda is not None
