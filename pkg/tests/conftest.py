"""
Pytest configuration: make ``src/`` importable as top-level modules.

Modules in ``src/`` are imported as siblings (``import config``,
``from poly import Poly``). Tests follow the same convention, so ``src/``
is prepended to ``sys.path``.
"""
from __future__ import annotations

import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent
SRC = PROJECT_ROOT / "src"

if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))


# ---------------------------------------------------------------------------
# Common fixtures
# ---------------------------------------------------------------------------

import numpy as np
import pytest

from exactfield import ExactField, parse_field


def pytest_configure(config: pytest.Config) -> None:
    config.addinivalue_line("markers", "slow: exhaustive censuses and long Monte-Carlo runs")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def Q() -> ExactField:
    return parse_field("Q")


@pytest.fixture
def F2() -> ExactField:
    return parse_field("F2")


@pytest.fixture
def F3() -> ExactField:
    return parse_field("F3")


@pytest.fixture
def F5() -> ExactField:
    return parse_field("F5")


@pytest.fixture
def F4() -> ExactField:
    return parse_field("F2^2")


@pytest.fixture
def F16() -> ExactField:
    return parse_field("F2^4")


@pytest.fixture(params=["Q", "F2", "F3", "F5", "F2^2", "F3^2"])
def any_field(request: pytest.FixtureRequest) -> ExactField:
    return parse_field(request.param)


@pytest.fixture(params=["F2", "F3", "F5", "F2^2", "F2^3", "F3^2"])
def finite_field(request: pytest.FixtureRequest) -> ExactField:
    return parse_field(request.param)
