"""Конфигурация pytest с фикстурами для тестов."""
import sys
from pathlib import Path

import numpy as np
import pytest

# Добавляем tests в путь для импорта
tests_dir = Path(__file__).parent
sys.path.insert(0, str(tests_dir))

from helpers.factories import MeasurementFactory  # noqa: E402

from wahbakit.domain.davenport import build_system  # noqa: E402
from wahbakit.domain.quaternion import normalize  # noqa: E402


@pytest.fixture
def rng():
    """Детерминированный генератор для каждого теста."""
    return np.random.default_rng(20240601)


@pytest.fixture
def q_true():
    return normalize([0.2, -0.4, 0.1, 0.85])


@pytest.fixture
def perfect_set(q_true):
    """Два точных измерения при известной ориентации."""
    return MeasurementFactory.perfect(q_true)


@pytest.fixture
def noisy_system(rng):
    q = normalize([0.3, -0.2, 0.5, 0.8])
    return build_system(MeasurementFactory.noisy(rng, sigma_deg=(0.5, 1.0), q_true=q))
