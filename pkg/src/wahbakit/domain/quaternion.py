"""Алгебра кватернионов.

Хранение везде scalar-last: ``[v1, v2, v3, s]``. Чистый кватернион
(генератор поворота) хранится как 3-вектор. Функции не мутируют аргументы и
всегда возвращают новые массивы.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from wahbakit.domain.errors import NearSingularError, NotUnitError

Quaternion = NDArray[np.float64]
PureQuaternion = NDArray[np.float64]
Mat3 = NDArray[np.float64]

UNIT_TOL = 1e-9
GIMBAL_EPS = 1e-8
SMALL_ANGLE = 1e-4


def quaternion(values: ArrayLike) -> Quaternion:
    q = np.asarray(values, dtype=np.float64).reshape(4)
    if not np.all(np.isfinite(q)):
        raise ValueError(f"Кватернион содержит нечисловые компоненты: {q}")
    return q.copy()


def identity() -> Quaternion:
    return np.array([0.0, 0.0, 0.0, 1.0])


def as_quaternion(p: ArrayLike) -> Quaternion:
    """Вложить чистый кватернион (3-вектор) в H с нулевой скалярной частью."""
    v = np.asarray(p, dtype=np.float64).reshape(3)
    return np.append(v, 0.0)


def cross_matrix(v: ArrayLike) -> Mat3:
    x, y, z = np.asarray(v, dtype=np.float64).reshape(3)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def quat_mul(p: ArrayLike, q: ArrayLike) -> Quaternion:
    """Произведение Гамильтона pq."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    vp, sp = p[:3], p[3]
    vq, sq = q[:3], q[3]
    vector = sp * vq + sq * vp + np.cross(vp, vq)
    scalar = sp * sq - np.dot(vp, vq)
    return np.append(vector, scalar)


def conjugate(q: ArrayLike) -> Quaternion:
    q = np.asarray(q, dtype=np.float64)
    return np.append(-q[:3], q[3])


def norm(q: ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(q, dtype=np.float64)))


def is_unit(q: ArrayLike, tol: float = UNIT_TOL) -> bool:
    return abs(norm(q) - 1.0) <= tol


def require_unit(q: ArrayLike, tol: float = UNIT_TOL) -> Quaternion:
    """Проверить единичность без перенормировки."""
    q = np.asarray(q, dtype=np.float64)
    n = norm(q)
    if abs(n - 1.0) > tol:
        raise NotUnitError(f"|q| = {n:.15g} отличается от 1 больше чем на {tol:g}")
    return q


def normalize(q: ArrayLike) -> Quaternion:
    q = np.asarray(q, dtype=np.float64)
    n = norm(q)
    if n == 0.0 or not np.isfinite(n):
        raise NotUnitError("Нельзя нормировать нулевой кватернион")
    return q / n


def canonicalize(q: ArrayLike) -> Quaternion:
    """Выбрать знак: Sq >= 0, при Sq == 0 первая ненулевая компонента Vq > 0."""
    q = np.array(q, dtype=np.float64)
    if q[3] < 0.0:
        return -q
    if q[3] == 0.0:
        nonzero = np.flatnonzero(q[:3])
        if nonzero.size and q[nonzero[0]] < 0.0:
            return -q
    return q


def quat_exp(p: ArrayLike) -> Quaternion:
    """Экспонента чистого кватерниона: cos|p| + (sin|p|/|p|) p."""
    p = np.asarray(p, dtype=np.float64).reshape(3)
    theta = float(np.linalg.norm(p))
    if theta < SMALL_ANGLE:
        theta2 = theta * theta
        sinc = 1.0 - theta2 / 6.0
        cos = 1.0 - theta2 / 2.0
    else:
        sinc = np.sin(theta) / theta
        cos = np.cos(theta)
    return np.append(sinc * p, cos)


def quat_log(q: ArrayLike) -> PureQuaternion:
    """Генератор p с e^p = ±Q; знак Q выбирается так, чтобы SQ >= 0."""
    q = canonicalize(require_unit(q))
    v, s = q[:3], q[3]
    vn = float(np.linalg.norm(v))
    if vn < GIMBAL_EPS:
        # theta ≈ vn, поправка O(vn²) ниже машинной точности
        return v / s
    theta = np.arctan2(vn, s)
    return (theta / vn) * v


def from_rodrigues(p: ArrayLike) -> Quaternion:
    p = np.asarray(p, dtype=np.float64).reshape(3)
    return np.append(p, 1.0) / np.sqrt(1.0 + p @ p)


def to_rodrigues(q: ArrayLike) -> NDArray[np.float64]:
    q = np.asarray(q, dtype=np.float64)
    if abs(q[3]) <= GIMBAL_EPS:
        raise NearSingularError(
            f"|Sq| = {abs(q[3]):.3g} <= {GIMBAL_EPS:g}: параметры Родрига не определены (поворот ~180°)"
        )
    return q[:3] / q[3]


def attitude_matrix(q: ArrayLike) -> Mat3:
    """A(q) = (s² − v·v)I + 2vvᵀ − 2s[v×]; A(pq) = A(q)A(p)."""
    q = require_unit(q)
    v, s = q[:3], q[3]
    return (s * s - v @ v) * np.eye(3) + 2.0 * np.outer(v, v) - 2.0 * s * cross_matrix(v)


def rotation_angle(q: ArrayLike) -> float:
    """Угол поворота в радианах, [0, π]."""
    return 2.0 * float(np.linalg.norm(quat_log(q)))


def to_list(q: ArrayLike) -> list[float]:
    return [float(x) for x in np.asarray(q, dtype=np.float64).reshape(4)]

