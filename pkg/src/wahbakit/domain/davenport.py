"""Данные собственной задачи Дэвенпорта и функционалы задачи Вахбы."""
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from wahbakit.domain.measurements import MeasurementSet
from wahbakit.domain.quaternion import Mat3, attitude_matrix, require_unit


@dataclass(frozen=True, slots=True)
class DavenportSystem:
    B: Mat3
    rho: Mat3
    z: NDArray[np.float64]
    sigma: float
    lambda0: float
    K: NDArray[np.float64]

    @property
    def scale(self) -> float:
        """Масштаб для порогов вырожденности: max(1, λ₀³)."""
        return max(1.0, self.lambda0**3)


def build_system(meas: MeasurementSet) -> DavenportSystem:
    """B = Σ wₙbₙrₙᵀ, ρ = B + Bᵀ, z = Σ wₙ bₙ×rₙ, σ = tr B, λ₀ = Σ wₙ."""
    meas.validate()

    B = np.zeros((3, 3))
    for b, r, w in meas.entries():
        B += w * np.outer(b, r)

    rho = B + B.T
    # b×r через антисимметричную часть B
    z = np.array([B[1, 2] - B[2, 1], B[2, 0] - B[0, 2], B[0, 1] - B[1, 0]])
    sigma = float(np.trace(B))
    lambda0 = meas.total_weight

    K = np.empty((4, 4))
    K[:3, :3] = rho - sigma * np.eye(3)
    K[:3, 3] = z
    K[3, :3] = z
    K[3, 3] = sigma

    for arr in (B, rho, z, K):
        arr.setflags(write=False)
    return DavenportSystem(B=B, rho=rho, z=z, sigma=sigma, lambda0=lambda0, K=K)


def gain(q: ArrayLike, sys: DavenportSystem) -> float:
    """G(A(q)) = qᵀKq."""
    q = require_unit(q)
    return float(q @ sys.K @ q)


def wahba_loss(q: ArrayLike, sys: DavenportSystem) -> float:
    """J = λ₀ − qᵀKq."""
    return sys.lambda0 - gain(q, sys)


def taste(lambda0: float, lambda_m: float) -> float:
    return lambda0 - lambda_m


def direct_gain(q: ArrayLike, meas: MeasurementSet) -> float:
    A = attitude_matrix(q)
    return float(sum(w * (b @ A @ r) for b, r, w in meas.entries()))


def direct_loss(q: ArrayLike, meas: MeasurementSet) -> float:
    """½ Σ wₙ‖bₙ − A(q)rₙ‖², без перехода к K."""
    A = attitude_matrix(q)
    residuals = meas.body - meas.reference @ A.T
    return 0.5 * float(np.sum(meas.weights * np.sum(residuals**2, axis=1)))
