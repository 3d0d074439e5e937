import io
import json

import pytest

from tvmcf import cli
from tvmcf.config import (
    ConfigSyntaxError, DemandPolicy, ExperimentGrid, InvariantError, SchemaError, parse_config,
    serialize_config,
)
from tvmcf.constellation import ConstellationConfig, TimeVaryingNetwork
from tvmcf.lp import SolverResourceError, read_lp_text, export_lp_text

SMALL = {"base": {"n": 3, "m": 3}, "k_values": [2], "T_values": [3], "trials": 1}


def run(argv):
    out = io.StringIO()
    code = cli.main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(SMALL))
    return path


# ---------------------------------------------------------------- config

def test_empty_config_has_defaults():
    grid = parse_config("{}")
    assert grid.base == ConstellationConfig()
    assert (grid.base.n, grid.base.m, grid.base.p, grid.base.q, grid.base.B_p, grid.base.B_t) == (5, 5, 1, 1, 3, 2)
    assert grid.k_values == (3, 5, 7, 9)
    assert grid.T_values == (4, 6, 8, 10, 12)
    assert grid.trials == 5


def test_zero_trials_names_key():
    with pytest.raises(InvariantError) as err:
        parse_config('{"trials": 0}')
    assert err.value.key == "trials"
    assert "trials" in str(err.value)


@pytest.mark.parametrize("text, cls, key", [
    ('{"trails": 5}', SchemaError, "trails"),
    ('{"base": {"orbits": 2}}', SchemaError, "base.orbits"),
    ('{"base": {"T": 2}}', SchemaError, "base.T"),
    ('{"k_values": []}', InvariantError, "k_values"),
    ('{"k_values": [1000]}', InvariantError, "k_values"),
    ('{"T_values": [0]}', InvariantError, "T_values"),
    ('{"trials": "5"}', SchemaError, "trials"),
    ('{"demand_policy": {"fixed": -1}}', InvariantError, "demand_policy.fixed"),
    ('{"demand_policy": {"normal": 1}}', SchemaError, "demand_policy"),
    ('{"demand_mode": "weekly"}', InvariantError, "demand_mode"),
    ('{"base": {"B_t": 5}}', InvariantError, "base.B_t"),
])
def test_config_errors_distinguishable(text, cls, key):
    with pytest.raises(cls) as err:
        parse_config(text)
    assert err.value.key == key


def test_syntax_error():
    with pytest.raises(ConfigSyntaxError):
        parse_config("{trials: 5")


def test_config_round_trip():
    grid = ExperimentGrid(base=ConstellationConfig(n=3, m=4, q=0), k_values=(1, 2), T_values=(2,),
                          trials=3, demand_policy=DemandPolicy("uniform", low=1, high=5),
                          demand_mode="aggregate", master_seed=7)
    text = serialize_config(grid)
    assert parse_config(text) == grid
    assert serialize_config(parse_config(text)) == text
    assert parse_config(serialize_config(ExperimentGrid())) == ExperimentGrid()


# ---------------------------------------------------------------- commands

def test_solve_single_step_is_one(small_config):
    code, out = run(["solve", "--config", str(small_config), "--T", "1"])
    assert code == 0
    assert "epsilon=1.000000" in out


def test_solve_lists_paths_and_is_deterministic(small_config, tmp_path):
    lp_path = tmp_path / "m.lp"
    argv = ["solve", "--config", str(small_config), "--paths", "--export-lp", str(lp_path)]
    code, out = run(argv)
    assert code == 0 and "commodity 0:" in out and "step 0 commodity" in out
    first_lp = lp_path.read_text()
    assert run(argv)[1] == out
    assert lp_path.read_text() == first_lp


def test_gen_round_trips(small_config, tmp_path):
    path = tmp_path / "topo.json"
    assert run(["gen", "--config", str(small_config), "--out", str(path)])[0] == 0
    net = TimeVaryingNetwork.from_json(path.read_text())
    assert net.num_nodes == 9 and net.T == 3
    assert net.to_json() == path.read_text()


def test_export_round_trips(small_config, tmp_path):
    path = tmp_path / "model.lp"
    assert run(["export", "--config", str(small_config), "--out", str(path)])[0] == 0
    text = path.read_text()
    assert export_lp_text(read_lp_text(text)) == text


def test_sweep_writes_table_and_leaves_config(small_config, tmp_path):
    before = small_config.read_bytes()
    out_dir = tmp_path / "results"
    code, out = run(["sweep", "--config", str(small_config), "--out", str(out_dir)])
    assert code == 0
    table = (out_dir / "table.csv").read_bytes()
    assert table.count(b"\n") == 2
    assert run(["sweep", "--config", str(small_config), "--out", str(out_dir)])[1] == out
    assert (out_dir / "table.csv").read_bytes() == table
    assert small_config.read_bytes() == before


def test_flags_override_config(small_config, tmp_path):
    path = tmp_path / "topo.json"
    run(["gen", "--config", str(small_config), "--T", "2", "--seed", "9", "--out", str(path)])
    assert TimeVaryingNetwork.from_json(path.read_text()).T == 2


def test_exit_codes(tmp_path, small_config, monkeypatch, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"trials": 0}')
    assert run(["solve", "--config", str(bad)])[0] == 1
    assert "trials" in capsys.readouterr().err
    assert run(["solve", "--config", str(tmp_path / "missing.json")])[0] == 1
    with pytest.raises(SystemExit) as exc:
        run(["solve", "--demand-mode", "weekly"])
    assert exc.value.code == 1

    def exhausted(*args, **kwargs):
        raise SolverResourceError("node limit 5 exceeded")

    monkeypatch.setattr(cli, "solve_epsilon", exhausted)
    assert run(["solve", "--config", str(small_config)])[0] == 2
    assert "node limit" in capsys.readouterr().err
