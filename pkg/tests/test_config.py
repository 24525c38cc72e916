import math

import numpy as np
import pytest

from wva_bench.config import (
    config_from_table,
    config_hash,
    config_to_dict,
    load_config,
    with_sweep_value,
)
from wva_bench.errors import ConfigError

from _oracles import benchmark_table, toml_dump


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(toml_dump(benchmark_table(trials=7, seed=99)))
    cfg = load_config(str(path), mode="detect")
    assert cfg.mode == "detect"
    assert cfg.trials == 7
    assert cfg.seed == 99
    assert cfg.n_per_trial == 100
    assert cfg.postselect_outcome == 1
    assert cfg.noise_kind == "constant"
    assert cfg.noise_params == (0.01,)
    assert cfg.coupling.meter.sigma == 10.0
    assert cfg.coupling.x_true == 0.1
    assert cfg.coupling.dim == 2
    assert cfg.sweep_param is None
    assert cfg.fisher_model is None


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="config"):
        load_config("/nonexistent/place.toml")


def test_load_config_invalid_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[system\ndimension = 2")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(str(path))


def test_missing_key_names_the_field():
    table = benchmark_table()
    del table["meter"]["sigma"]
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "meter.sigma"


def test_wrong_pair_count_names_the_field():
    table = benchmark_table()
    table["system"]["observable"] = [[1.0, 0.0]]
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "system.observable"


def test_non_hermitian_observable():
    table = benchmark_table()
    table["system"]["observable"] = [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "system.observable"


def test_unnormalized_state():
    table = benchmark_table()
    table["system"]["initial_state"] = [[1.0, 0.0], [1.0, 0.0]]
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "system.initial_state"


def test_non_orthonormal_basis():
    table = benchmark_table()
    table["system"]["basis"] = [[1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "system.basis"


def test_bad_sigma():
    table = benchmark_table()
    table["meter"]["sigma"] = -2.0
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "meter.sigma"


def test_unknown_noise_kind():
    table = benchmark_table()
    table["noise"]["kind"] = "pink"
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "noise.kind"


def test_postselect_out_of_range():
    table = benchmark_table()
    table["run"]["postselect_outcome"] = 3
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "run.postselect_outcome"


def test_counts_must_be_positive():
    for key in ("trials", "n_per_trial"):
        table = benchmark_table()
        table["run"][key] = 0
        with pytest.raises(ConfigError) as err:
            config_from_table(table)
        assert err.value.field == f"run.{key}"


def test_integer_fields_reject_floats():
    table = benchmark_table()
    table["run"]["trials"] = 2.5
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "run.trials"


def test_seed_range():
    table = benchmark_table(seed=-1)
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "run.seed"
    table = benchmark_table(seed=2**64 - 1)
    assert config_from_table(table).seed == 2**64 - 1


def test_sweep_parsing():
    table = benchmark_table(sweep=("sigma", [2.0, 4.0]))
    cfg = config_from_table(table)
    assert cfg.sweep_param == "sigma"
    assert cfg.sweep_values == (2.0, 4.0)


def test_sweep_requires_both_keys():
    table = benchmark_table()
    table["sweep"] = {"param": "sigma"}
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "sweep"


def test_unknown_sweep_param():
    table = benchmark_table(sweep=("temperature", [1.0]))
    with pytest.raises(ConfigError) as err:
        config_from_table(table)
    assert err.value.field == "sweep.param"


def test_theta_sweep_needs_qubit():
    table = benchmark_table(sweep=("theta", [0.4]))
    cfg = config_from_table(table)
    assert cfg.sweep_param == "theta"
    eye3 = np.eye(3)
    table3 = benchmark_table(sweep=("theta", [0.4]))
    table3["system"]["dimension"] = 3
    table3["system"]["observable"] = [
        [float(eye3[i, j]), 0.0] for i in range(3) for j in range(3)
    ]
    table3["system"]["initial_state"] = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
    table3["system"]["basis"] = [
        [float(eye3[i, j]), 0.0] for i in range(3) for j in range(3)
    ]
    with pytest.raises(ConfigError) as err:
        config_from_table(table3)
    assert err.value.field == "sweep.param"


def test_hash_stable_and_sensitive():
    a = config_from_table(benchmark_table())
    b = config_from_table(benchmark_table())
    assert config_hash(a) == config_hash(b)
    c = config_from_table(benchmark_table(sigma=11.0))
    assert config_hash(a) != config_hash(c)


def test_hash_ignores_table_ordering():
    table = benchmark_table()
    reordered = {k: dict(reversed(list(v.items()))) for k, v in reversed(list(table.items()))}
    a = config_from_table(table)
    b = config_from_table(reordered)
    assert config_hash(a) == config_hash(b)


def test_to_dict_round_trips_through_table():
    cfg = config_from_table(benchmark_table())
    again = config_from_table(config_to_dict(cfg))
    assert config_hash(cfg) == config_hash(again)


def test_with_sweep_value_sigma():
    cfg = config_from_table(benchmark_table())
    out = with_sweep_value(cfg, "sigma", 5.0)
    assert out.coupling.meter.sigma == 5.0
    assert out.coupling.x_true == cfg.coupling.x_true


def test_with_sweep_value_x_true():
    cfg = config_from_table(benchmark_table())
    out = with_sweep_value(cfg, "x_true", 0.25)
    assert out.coupling.x_true == 0.25


def test_with_sweep_value_n_per_trial():
    cfg = config_from_table(benchmark_table())
    out = with_sweep_value(cfg, "n_per_trial", 12.0)
    assert out.n_per_trial == 12
    with pytest.raises(ConfigError):
        with_sweep_value(cfg, "n_per_trial", 2.5)


def test_with_sweep_value_theta():
    cfg = config_from_table(benchmark_table())
    out = with_sweep_value(cfg, "theta", 0.3)
    amps = out.coupling.initial_state.amplitudes
    assert amps[0] == pytest.approx(math.cos(0.3), abs=1e-12)
    assert amps[1] == pytest.approx(math.sin(0.3), abs=1e-12)


def test_fisher_section_builds_model():
    table = benchmark_table()
    sz_sx = np.kron(np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    table["fisher"] = {
        "dim_a": 2,
        "dim_b": 2,
        "hamiltonian": [[float(sz_sx[i, j]), 0.0] for i in range(4) for j in range(4)],
        "initial_b": [[1.0, 0.0], [0.0, 0.0]],
    }
    cfg = config_from_table(table)
    assert cfg.fisher_model is not None
    assert cfg.fisher_model.dim_a == 2
    assert cfg.fisher_model.dim_b == 2
    assert cfg.fisher_model.x == cfg.coupling.x_true


def test_invalid_mode():
    with pytest.raises(ConfigError) as err:
        config_from_table(benchmark_table(), mode="train")
    assert err.value.field == "run.mode"
