import numpy as np
import pytest

from _oracles import benchmark_qubit, benchmark_table


@pytest.fixture
def bench_config():
    return benchmark_qubit()


@pytest.fixture
def bench_table():
    return benchmark_table


@pytest.fixture
def rng():
    return np.random.default_rng(0xBEEF)
