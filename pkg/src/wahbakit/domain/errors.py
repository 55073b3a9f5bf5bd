"""Иерархия исключений wahba-kit.

Каждый класс несёт стабильный ``code`` (его печатает CLI в stderr) и
``exit_code``: 1 для ошибок ввода/конфигурации, 2 для численных отказов.
"""


class WahbaKitError(Exception):
    code = "WahbaKitError"
    exit_code = 1


class InputError(WahbaKitError):
    """Файл не найден, не читается или не разбирается."""

    code = "InputError"


class ConfigError(WahbaKitError):
    code = "ConfigError"


class InvalidMeasurementError(WahbaKitError):
    """Нарушены инварианты набора измерений (N < 2, не единичный вектор, w <= 0)."""

    code = "InvalidMeasurement"


class NotUnitError(WahbaKitError):
    code = "NotUnit"


class NumericalError(WahbaKitError):
    """Базовый класс численных отказов решателей."""

    code = "NumericalError"
    exit_code = 2


class NearSingularError(NumericalError):
    """Матрица (λ+σ)I − ρ почти вырождена или |Sq| ~ 0 (поворот около 180°)."""

    code = "NearSingular"


class NoConvergenceError(NumericalError):
    code = "NoConvergence"


class DivergenceDetectedError(NumericalError):
    """Последовательность λ_a убывает: нарушено предположение о малом возмущении."""

    code = "DivergenceDetected"


class ConvergenceViolationError(NumericalError):
    """|Δλ|·‖D‖ >= 1: ряд Неймана не сходится, нужна прямая инверсия."""

    code = "ConvergenceViolation"
