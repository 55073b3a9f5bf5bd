"""Решатели задачи Вахбы (q-method, QUEST, первый порядок, рекурсия) и испытания Монте-Карло."""

__version__ = "0.1.0"
