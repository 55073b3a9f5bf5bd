from abc import ABC, abstractmethod
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from wahbakit.domain.measurements import MeasurementSet
from wahbakit.domain.simulation import CampaignConfig, Histogram
from wahbakit.domain.solvers import SolveReport


class MeasurementReader(ABC):
    @abstractmethod
    def read(self, path: Path) -> MeasurementSet:
        raise NotImplementedError


class ReportWriter(ABC):
    @abstractmethod
    def render_report(self, report: SolveReport) -> str:
        raise NotImplementedError

    @abstractmethod
    def render_rows(self, rows: Sequence[dict[str, Any]]) -> str:
        raise NotImplementedError


class HistogramWriter(ABC):
    extension: str

    @abstractmethod
    def render(self, histogram: Histogram, config: CampaignConfig) -> str:
        raise NotImplementedError
