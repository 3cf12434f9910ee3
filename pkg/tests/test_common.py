import json

import numpy as np
import pytest
from omegaconf import OmegaConf

from common.errors import ConfigError, DimensionMismatch
from common.io_utils import load_csv, load_json, save_csv, save_json
from common.misc import child_seeds, mean_var, parallel_map, seed_record
from common.type_utils import as_matrix, as_vector, config_digest


def test_child_seeds_are_stateless():
    first = [s.generate_state(2).tolist() for s in child_seeds(11, 3)]
    again = [s.generate_state(2).tolist() for s in child_seeds(11, 3)]
    assert first == again
    assert len({tuple(s) for s in first}) == 3


def test_child_seeds_of_a_child():
    parent = child_seeds(5, 2)[1]
    grandchildren = child_seeds(parent, 2)
    assert grandchildren[0].spawn_key == (1, 0)
    assert seed_record(grandchildren[0]) == "5/1.0"
    assert seed_record(7) == "7"


def test_mean_var():
    empty_mean, empty_var = mean_var([])
    assert np.isnan(empty_mean) and empty_var is None
    assert mean_var([3.0]) == (3.0, None)
    mean, var = mean_var([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert var == pytest.approx(np.var([1, 2, 3, 4], ddof=1))


@pytest.mark.parametrize("threads", [1, 4])
def test_parallel_map_keeps_order(threads):
    assert parallel_map(lambda x: x * x, range(20), threads=threads) == [x * x for x in range(20)]


def test_as_vector():
    np.testing.assert_array_equal(as_vector(2.0, 3), [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(as_vector(OmegaConf.create([1, 2])), [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        as_vector([1, 2], 3)
    with pytest.raises(ConfigError):
        as_vector([1, -1], nonnegative=True)
    with pytest.raises(ConfigError):
        as_vector(None, name="lam")
    with pytest.raises(ConfigError):
        as_vector(["a"])


def test_as_matrix():
    assert as_matrix([1, 2, 3]).shape == (1, 3)
    with pytest.raises(DimensionMismatch):
        as_matrix([[1, 2]], shape=(2, 1))


def test_config_digest_ignores_output_location():
    a = OmegaConf.create({"rho": 0.5, "exp_dir": "/tmp/a", "market": {"name": "geometric"}})
    b = OmegaConf.create({"market": {"name": "geometric"}, "exp_dir": "/tmp/b", "rho": 0.5})
    c = OmegaConf.create({"rho": 0.25, "exp_dir": "/tmp/a", "market": {"name": "geometric"}})
    assert config_digest(a) == config_digest(b)
    assert config_digest(a) != config_digest(c)


def test_csv_and_json_files(tmp_path):
    rows = [dict(tau=10.0, flag=True, name="x"), dict(tau=0.1, flag=False, name="y")]
    path = save_csv(rows, tmp_path / "out" / "rows.csv", cols=["tau", "flag", "name"])
    assert path.read_text() == "tau,flag,name\n10.0,1,x\n0.1,0,y\n"
    contents, cols = load_csv(path)
    assert cols == ["tau", "flag", "name"]
    assert contents["name"] == ["x", "y"]
    assert not list((tmp_path / "out").glob(".*.tmp"))

    save_json({"a": [1, 2]}, tmp_path / "r.json")
    assert load_json(tmp_path / "r.json") == {"a": [1, 2]}


def _strict_load(path):
    def reject(token):
        raise ValueError(f"non-standard JSON constant {token}")
    return json.loads(path.read_text(), parse_constant=reject)


def test_json_writes_non_finite_as_null(tmp_path):
    path = save_json({"x": float("nan"), "y": (float("inf"), 1.0), "z": {"w": np.float64("nan")}},
                     tmp_path / "nan.json")
    assert _strict_load(path) == {"x": None, "y": [None, 1.0], "z": {"w": None}}
