from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from phonaudit.alignment import CostModel
from phonaudit.features import FeatureTable, default_table


@pytest.fixture(scope="session")
def table() -> FeatureTable:
    return default_table()


@pytest.fixture(scope="session")
def cost(table: FeatureTable) -> CostModel:
    return CostModel.from_table(table)
