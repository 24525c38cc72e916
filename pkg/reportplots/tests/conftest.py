import pathlib

import pytest

from reportplots.loader import COLUMNS

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def golden_csv() -> str:
    return str(DATA / "sigma_sweep.csv")


@pytest.fixture
def header_only_csv(tmp_path) -> str:
    path = tmp_path / "empty.csv"
    path.write_text(",".join(COLUMNS) + "\n")
    return str(path)
