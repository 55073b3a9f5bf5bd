"""Решатели задачи Вахбы.

* ``q_method``: спектральное разложение K циклическим методом Якоби (оракул);
* ``quest_classic``: Ньютон по характеристическому уравнению от λ₀;
* ``zeroth_order`` / ``first_order``: аналитические оценки λ ≈ λ₀ и λ₁ = q₀ᵀKq₀;
* ``recursive_solve``: итерация отношения Рэлея с обновлением резольвенты
  рядом Неймана (обращение матрицы только на инициализации).

Везде используется p = [(σ+λ)I − ρ]⁻¹z, т.е. знак из p = −[ρ − (σ+λ)I]⁻¹z
внесён в скобку, и D(λ) = [(λ+σ)I − ρ]⁻¹.
"""
import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from wahbakit.domain.davenport import DavenportSystem, taste
from wahbakit.domain.errors import (
    ConvergenceViolationError,
    DivergenceDetectedError,
    NearSingularError,
    NoConvergenceError,
)
from wahbakit.domain.quaternion import Mat3, Quaternion, canonicalize, from_rodrigues, normalize

logger = logging.getLogger(__name__)

JACOBI_MAX_SWEEPS = 50
JACOBI_REL_THRESHOLD = 1e-14
SINGULAR_REL_THRESHOLD = 1e-12
DEFAULT_TOL_SCALE = 1e-13
QUEST_MAX_ITER = 20
RECURSIVE_MAX_ITER = 8
NEUMANN_FALLBACK = 0.5
DIVERGENCE_STREAK = 3
POLISH_MAX_STEPS = 6
POLISH_FLOOR = 1e-14
STALL_RATIO = 0.1
STALL_SCALAR = 0.2
ACCEPT_RESIDUAL = 1e-8


class SolverMethod(str, enum.Enum):
    q_method = "q_method"
    quest = "quest"
    first_order = "first_order"
    recursive = "recursive"
    zeroth_order = "zeroth_order"


@dataclass(frozen=True, slots=True)
class SolveReport:
    q: Quaternion
    eigenvalue: float
    iterations: int
    residual: float
    taste: float
    method: SolverMethod
    lambda_history: tuple[float, ...] = field(default=())


@dataclass(frozen=True, slots=True)
class Resolvent:
    """D(λ) = [(λ+σ)I − ρ]⁻¹ вместе с λ, при котором она получена."""

    D: Mat3
    lambda_at: float

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.D))


def default_tol(sys: DavenportSystem, tol_scale: float = DEFAULT_TOL_SCALE) -> float:
    return tol_scale * sys.lambda0


def eigen_residual(K: NDArray[np.float64], q: ArrayLike, lam: float) -> float:
    q = np.asarray(q, dtype=np.float64)
    return float(np.linalg.norm(K @ q - lam * q))


def _report(
    sys: DavenportSystem,
    method: SolverMethod,
    q: ArrayLike,
    lam: float,
    iterations: int,
    history: tuple[float, ...] = (),
) -> SolveReport:
    q = canonicalize(q)
    return SolveReport(
        q=q,
        eigenvalue=float(lam),
        iterations=iterations,
        residual=eigen_residual(sys.K, q, lam),
        taste=taste(sys.lambda0, lam),
        method=method,
        lambda_history=tuple(float(x) for x in history),
    )


# --- q-Method -------------------------------------------------------------------


def jacobi_eigh(
    matrix: ArrayLike, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """Циклический метод Якоби для малой симметричной матрицы.

    Returns:
        (собственные значения по возрастанию, собственные векторы-столбцы, число проходов)

    Raises:
        NoConvergenceError: внедиагональная норма не упала ниже 1e-14·‖M‖_F за ``max_sweeps`` проходов
    """
    A = np.array(matrix, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    threshold = JACOBI_REL_THRESHOLD * float(np.linalg.norm(A))

    for sweep in range(max_sweeps + 1):
        off = float(np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2)))
        if off <= threshold:
            eigenvalues = np.diag(A).copy()
            order = np.argsort(eigenvalues)
            return eigenvalues[order], V[:, order], sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = c
                J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                A[p, q] = 0.0
                A[q, p] = 0.0
                V = V @ J

    raise NoConvergenceError(
        f"Метод Якоби не сошёлся за {max_sweeps} проходов (off = {off:.3g}); матрица K некорректна?"
    )


def q_method(sys: DavenportSystem) -> SolveReport:
    eigenvalues, vectors, sweeps = jacobi_eigh(sys.K)
    lam = float(eigenvalues[-1])
    q = normalize(vectors[:, -1])
    logger.debug("q-method: %d проходов Якоби, λ_m = %.17g", sweeps, lam)
    return _report(sys, SolverMethod.q_method, q, lam, iterations=sweeps)


# --- резольвента ----------------------------------------------------------------


def adjugate3(M: ArrayLike) -> tuple[Mat3, float]:
    """Присоединённая матрица и определитель 3×3 через векторные произведения строк."""
    M = np.asarray(M, dtype=np.float64)
    r0, r1, r2 = M
    c0 = np.cross(r1, r2)
    adj = np.column_stack([c0, np.cross(r2, r0), np.cross(r0, r1)])
    return adj, float(r0 @ c0)


def resolvent_direct(sys: DavenportSystem, lam: float) -> Resolvent:
    """Точная D(λ) по аналитической формуле обращения."""
    M = (lam + sys.sigma) * np.eye(3) - sys.rho
    adj, det = adjugate3(M)
    if abs(det) <= SINGULAR_REL_THRESHOLD * sys.scale:
        raise NearSingularError(
            f"det[(λ+σ)I − ρ] = {det:.3g} при λ = {lam:.12g}: матрица вырождена (поворот ~180°)"
        )
    return Resolvent(D=adj / det, lambda_at=float(lam))


def neumann_inverse_update(D_prev: Resolvent, dlambda: float) -> Resolvent:
    """D(λ + Δλ) ≈ D(λ) − Δλ·D(λ)², ошибка O(Δλ²·‖D‖³).

    Raises:
        ConvergenceViolationError: |Δλ|·‖D‖_F >= 1, ряд Неймана не сходится
    """
    contraction = abs(dlambda) * D_prev.frobenius
    if contraction >= 1.0:
        raise ConvergenceViolationError(
            f"|Δλ|·‖D‖_F = {contraction:.3g} >= 1: требуется прямое обращение"
        )
    if dlambda == 0.0:
        return Resolvent(D=D_prev.D.copy(), lambda_at=D_prev.lambda_at)
    D = D_prev.D
    return Resolvent(D=D - dlambda * (D @ D), lambda_at=D_prev.lambda_at + dlambda)


def refine_resolvent(res: Resolvent, sys: DavenportSystem) -> Resolvent:
    """Одна поправка D ← D(2I − MD) без обращения; квадратично гасит ошибку D."""
    M = (res.lambda_at + sys.sigma) * np.eye(3) - sys.rho
    return Resolvent(D=res.D @ (2.0 * np.eye(3) - M @ res.D), lambda_at=res.lambda_at)


def resolvent_residual(res: Resolvent, sys: DavenportSystem) -> float:
    """‖I − MD‖_F для M = (λ+σ)I − ρ."""
    M = (res.lambda_at + sys.sigma) * np.eye(3) - sys.rho
    return float(np.linalg.norm(np.eye(3) - M @ res.D))


def polish_resolvent(res: Resolvent, sys: DavenportSystem, max_steps: int = POLISH_MAX_STEPS) -> Resolvent:
    """Поправки D(2I − MD) до уровня округления.

    После шага Неймана ‖I − MD‖ <= (|Δλ|·‖D‖)² < 1, и каждая поправка его возводит в квадрат.
    """
    for _ in range(max_steps):
        if resolvent_residual(res, sys) <= POLISH_FLOOR:
            break
        res = refine_resolvent(res, sys)
    return res


def _quaternion_from(res: Resolvent, z: NDArray[np.float64]) -> Quaternion:
    # (1 + zᵀDᵀDz)^(-1/2) [Dz; 1]
    return from_rodrigues(res.D @ z)


# --- QUEST ----------------------------------------------------------------------


def quest_classic(sys: DavenportSystem, tol: float | None = None, max_iter: int | None = None) -> SolveReport:
    """Ньютон по f(λ) = λ − σ − zᵀD(λ)z, f′(λ) = 1 + zᵀD(λ)²z, старт из λ₀."""
    tol = default_tol(sys) if tol is None else tol
    max_iter = QUEST_MAX_ITER if max_iter is None else max_iter
    if tol <= 0.0:
        raise ValueError("tol должен быть > 0")

    lam = sys.lambda0
    history = [lam]
    for iteration in range(1, max_iter + 1):
        Dz = resolvent_direct(sys, lam).D @ sys.z
        f = lam - sys.sigma - sys.z @ Dz
        fprime = 1.0 + Dz @ Dz
        step = f / fprime
        lam = float(lam - step)
        history.append(lam)
        if abs(step) < tol:
            break
    else:
        raise NoConvergenceError(f"QUEST: |Δλ| >= {tol:.3g} после {max_iter} итераций Ньютона")

    q = _quaternion_from(resolvent_direct(sys, lam), sys.z)
    return _report(sys, SolverMethod.quest, q, lam, iterations=iteration, history=tuple(history))


# --- возмущения -----------------------------------------------------------------


def zeroth_order(sys: DavenportSystem) -> SolveReport:
    """λ ≈ λ₀ и q₀ с параметрами Родрига D(λ₀)z."""
    q0 = _quaternion_from(resolvent_direct(sys, sys.lambda0), sys.z)
    return _report(sys, SolverMethod.zeroth_order, q0, sys.lambda0, iterations=0, history=(sys.lambda0,))


def first_order(sys: DavenportSystem) -> SolveReport:
    """λ₁ = q₀ᵀKq₀, q₁: кватернион с параметрами Родрига D(λ₁)z. Без итераций."""
    q0 = _quaternion_from(resolvent_direct(sys, sys.lambda0), sys.z)
    lambda1 = float(q0 @ sys.K @ q0)
    q1 = _quaternion_from(resolvent_direct(sys, lambda1), sys.z)
    return _report(sys, SolverMethod.first_order, q1, lambda1, iterations=1, history=(sys.lambda0, lambda1))


def recursive_solve(sys: DavenportSystem, tol: float | None = None, max_iter: int | None = None) -> SolveReport:
    """Рекурсивная оценка: λ_a = q_{a−1}ᵀKq_{a−1}, D(λ_a) по Нейману, q_a из D(λ_a)z.

    Обращение выполняется на инициализации; повторно только если
    |Δλ|·‖D‖_F >= 0.5 (ряд Неймана без запаса сходимости). После каждого
    шага Неймана D доводится поправками D(2I − MD), без обращения.
    Итоговое λ равно отношению Рэлея последнего q.

    Raises:
        NearSingularError: D(λ₀) вырождена, либо итерация не сжимается при |Sq| < 0.2
        DivergenceDetectedError: λ_a убывает три шага подряд
        NoConvergenceError: нет сходимости за ``max_iter`` итераций
    """
    tol = default_tol(sys) if tol is None else tol
    max_iter = RECURSIVE_MAX_ITER if max_iter is None else max_iter
    if tol <= 0.0:
        raise ValueError("tol должен быть > 0")

    lam_prev = sys.lambda0
    res = resolvent_direct(sys, lam_prev)
    q = _quaternion_from(res, sys.z)
    history = [lam_prev]
    decreasing = 0

    for iteration in range(1, max_iter + 1):
        lam = float(q @ sys.K @ q)
        dlam = lam - lam_prev
        history.append(lam)

        if abs(dlam) * res.frobenius >= NEUMANN_FALLBACK:
            logger.info(
                "Рекурсия: |Δλ|·‖D‖ = %.3g, пересчёт D прямым обращением",
                abs(dlam) * res.frobenius,
                extra={"iteration": iteration, "dlambda": dlam},
            )
            res = resolvent_direct(sys, lam)
        else:
            res = polish_resolvent(neumann_inverse_update(res, dlam), sys)
        q = _quaternion_from(res, sys.z)

        # вблизи 180° сходимость теряет квадратичность: шаг почти не убывает
        if (
            iteration >= 3
            and abs(dlam) > 10.0 * tol
            and abs(dlam) > STALL_RATIO * abs(history[-2] - history[-3])
            and abs(q[3]) < STALL_SCALAR
        ):
            raise NearSingularError(
                f"Рекурсия не сжимается при |Sq| = {abs(q[3]):.3g} (шаг {dlam:.3g}); поворот близок к 180°"
            )
        # монотонность λ_a не гарантирована, только проверяется
        decreasing = decreasing + 1 if dlam < -10.0 * tol else 0
        if decreasing >= DIVERGENCE_STREAK:
            raise DivergenceDetectedError(
                f"λ_a убывает {decreasing} шага подряд (λ = {history[-DIVERGENCE_STREAK - 1:]}); плохое SNR измерений"
            )
        if abs(dlam) < tol:
            lam = float(q @ sys.K @ q)
            residual = eigen_residual(sys.K, q, lam)
            if residual <= ACCEPT_RESIDUAL * sys.lambda0:
                break
            logger.warning(
                "Рекурсия: |Δλ| < tol, но |Kq − λq| = %.3g",
                residual,
                extra={"iteration": iteration},
            )
        lam_prev = history[-1]
    else:
        raise NoConvergenceError(f"Рекурсия: |Δλ| >= {tol:.3g} после {max_iter} итераций")

    logger.debug("Рекурсия сошлась за %d итераций, λ = %.17g", iteration, lam)
    return _report(sys, SolverMethod.recursive, q, lam, iterations=iteration, history=tuple(history))


def solve(
    sys: DavenportSystem,
    method: SolverMethod | str,
    tol: float | None = None,
    max_iter: int | None = None,
) -> SolveReport:
    method = SolverMethod(method)
    if method is SolverMethod.q_method:
        return q_method(sys)
    if method is SolverMethod.quest:
        return quest_classic(sys, tol=tol, max_iter=max_iter)
    if method is SolverMethod.first_order:
        return first_order(sys)
    if method is SolverMethod.zeroth_order:
        return zeroth_order(sys)
    return recursive_solve(sys, tol=tol, max_iter=max_iter)
