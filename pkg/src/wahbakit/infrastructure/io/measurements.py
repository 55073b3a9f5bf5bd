import csv
import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, RootModel, ValidationError

from wahbakit.domain.errors import InputError
from wahbakit.domain.measurements import MeasurementSet
from wahbakit.domain.readers import MeasurementReader

CSV_COLUMNS = ("bx", "by", "bz", "rx", "ry", "rz", "w")


class MeasurementEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    b: list[float] = Field(..., min_length=3, max_length=3)
    r: list[float] = Field(..., min_length=3, max_length=3)
    w: float


class MeasurementFile(BaseModel):
    measurements: list[MeasurementEntry]


class MeasurementList(RootModel[list[MeasurementEntry]]):
    pass


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"Не удалось прочитать {path}: {e}") from e


class JsonMeasurementReader(MeasurementReader):
    """``{"measurements": [{"b": [...], "r": [...], "w": ...}, ...]}`` или просто список."""

    def read(self, path: Path) -> MeasurementSet:
        text = _read_text(path)
        try:
            payload = json.loads(text)
            if isinstance(payload, list):
                entries = MeasurementList.model_validate(payload).root
            else:
                entries = MeasurementFile.model_validate(payload).measurements
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: некорректный JSON ({e.msg}, строка {e.lineno})") from e
        except ValidationError as e:
            raise InputError(f"{path}: неверная структура измерений: {e.error_count()} ошибок") from e
        return MeasurementSet.from_entries(((entry.b, entry.r, entry.w) for entry in entries), validate=False)


class CsvMeasurementReader(MeasurementReader):
    """Заголовок ``bx,by,bz,rx,ry,rz,w``, по строке на измерение."""

    def read(self, path: Path) -> MeasurementSet:
        rows = list(csv.DictReader(_read_text(path).splitlines()))
        if not rows:
            raise InputError(f"{path}: пустой CSV")
        missing = [c for c in CSV_COLUMNS if c not in rows[0]]
        if missing:
            raise InputError(f"{path}: нет колонок {', '.join(missing)}")
        try:
            entries = [
                (
                    [float(row[c]) for c in CSV_COLUMNS[:3]],
                    [float(row[c]) for c in CSV_COLUMNS[3:6]],
                    float(row["w"]),
                )
                for row in rows
            ]
        except (TypeError, ValueError) as e:
            raise InputError(f"{path}: нечисловое значение в CSV: {e}") from e
        return MeasurementSet.from_entries(entries, validate=False)


def reader_for(path: Path) -> MeasurementReader:
    if path.suffix.lower() == ".csv":
        return CsvMeasurementReader()
    return JsonMeasurementReader()
