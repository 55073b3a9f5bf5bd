from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from wahbakit.domain.errors import InvalidMeasurementError

VECTOR_UNIT_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class MeasurementSet:
    """Взвешенные пары (b в теле, r в опорной системе) единичных векторов."""

    body: NDArray[np.float64]
    reference: NDArray[np.float64]
    weights: NDArray[np.float64]

    @classmethod
    def from_arrays(
        cls, body: ArrayLike, reference: ArrayLike, weights: ArrayLike, *, validate: bool = True
    ) -> "MeasurementSet":
        try:
            body_arr = np.array(body, dtype=np.float64).reshape(-1, 3)
            ref_arr = np.array(reference, dtype=np.float64).reshape(-1, 3)
            w_arr = np.array(weights, dtype=np.float64).reshape(-1)
        except (TypeError, ValueError) as e:
            raise InvalidMeasurementError(f"Некорректная форма массивов измерений: {e}") from e
        for arr in (body_arr, ref_arr, w_arr):
            arr.setflags(write=False)
        meas = cls(body=body_arr, reference=ref_arr, weights=w_arr)
        if validate:
            meas.validate()
        return meas

    @classmethod
    def from_entries(
        cls, entries: Iterable[tuple[ArrayLike, ArrayLike, float]], *, validate: bool = True
    ) -> "MeasurementSet":
        entries = list(entries)
        if not entries:
            raise InvalidMeasurementError("Пустой набор измерений")
        body, reference, weights = zip(*entries, strict=True)
        return cls.from_arrays(body, reference, weights, validate=validate)

    def __len__(self) -> int:
        return int(self.weights.shape[0])

    def entries(self) -> Iterator[tuple[NDArray[np.float64], NDArray[np.float64], float]]:
        for b, r, w in zip(self.body, self.reference, self.weights, strict=True):
            yield b, r, float(w)

    def validate(self) -> None:
        n = len(self)
        if self.body.shape != (n, 3) or self.reference.shape != (n, 3):
            raise InvalidMeasurementError(
                f"Число векторов b ({self.body.shape[0]}), r ({self.reference.shape[0]}) и весов ({n}) не совпадает"
            )
        if n < 2:
            raise InvalidMeasurementError(f"Нужно минимум 2 измерения, получено {n}")
        if not (np.all(np.isfinite(self.body)) and np.all(np.isfinite(self.reference))
                and np.all(np.isfinite(self.weights))):
            raise InvalidMeasurementError("Измерения содержат нечисловые значения")
        bad_w = np.flatnonzero(self.weights <= 0.0)
        if bad_w.size:
            raise InvalidMeasurementError(f"Веса должны быть > 0 (строки {bad_w.tolist()})")
        for name, vectors in (("b", self.body), ("r", self.reference)):
            deviation = np.abs(np.linalg.norm(vectors, axis=1) - 1.0)
            bad = np.flatnonzero(deviation > VECTOR_UNIT_TOL)
            if bad.size:
                raise InvalidMeasurementError(
                    f"Векторы {name} не единичные (строки {bad.tolist()}, max |‖v‖−1| = {deviation.max():.3g}); "
                    "используйте явную перенормировку"
                )

    def normalized(self) -> "MeasurementSet":
        """Явная перенормировка векторов (опция --renormalize)."""
        body = self.body / np.linalg.norm(self.body, axis=1, keepdims=True)
        reference = self.reference / np.linalg.norm(self.reference, axis=1, keepdims=True)
        return MeasurementSet.from_arrays(body, reference, self.weights)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())
