import dataclasses
import json

import pytest

from cmdb_mbqc import scenarios
from cmdb_mbqc.cli import main
from cmdb_mbqc.config import ConfigError, RunConfig, parse_config
from cmdb_mbqc.encoding import CertificationError
from cmdb_mbqc.lattice import LatticeSpec, Layout


def write(tmp_path, **over):
    cfg = {
        "schema_version": 1,
        "scenario": "chain-to-cluster",
        "lattice": {"chains": 1, "sites_per_chain": 4, "layout": "single_chain"},
        "seed": 3,
        "trials": 5,
        "out_dir": str(tmp_path / "out"),
    }
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path


def test_unknown_field_reports_its_line():
    text = '{\n  "schema_version": 1,\n  "scenario": "distill-2d",\n  "trails": 3\n}'
    with pytest.raises(ConfigError, match=r"line 4: unknown field 'trails'"):
        parse_config(text)


@pytest.mark.parametrize(
    "text,match",
    [
        ('{"schema_version": 2, "scenario": "distill-2d"}', "schema_version must be 1"),
        ('{"schema_version": 1,\n "scenario": "nope"}', "line 2: unknown scenario"),
        ('{"schema_version": 1,\n "scenario": "distill-2d",\n "trials": 0}', "line 3: trials must be >= 1"),
        ('{"schema_version": 1,\n "scenario": "distill-2d",,}', "line 2"),
        ('{"schema_version": 1, "scenario": "distill-2d", "lattice": {"chains": 2, "sitez": 3}}', "unknown lattice field"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_oracle_needs_small_lattice(tmp_path):
    path = write(tmp_path, lattice={"chains": 1, "sites_per_chain": 6, "layout": "single_chain"}, oracle=True)
    assert main(["run", "--config", str(path)]) == 2


def test_run_writes_outputs(tmp_path):
    path = write(tmp_path)
    assert main(["run", "--config", str(path)]) == 0
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    assert report["aggregate"]["pass_rate"] == 1.0
    assert len(json.loads((out / "outcomes.json").read_text())) == 5
    assert (out / "graph_0.dot").read_text().startswith("graph")


def test_same_seed_same_report(tmp_path):
    cfg = RunConfig("distill-2d", LatticeSpec(2, 4, Layout.CMDB_2D), seed=9, trials=4)
    a, b = scenarios.run(cfg), scenarios.run(cfg)
    assert json.dumps(a.trials) == json.dumps(b.trials)
    c = scenarios.run(dataclasses.replace(cfg, workers=2))
    assert json.dumps(a.trials) == json.dumps(c.trials)


def test_certification_failure_exit_code(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise CertificationError("forced failure")

    monkeypatch.setattr(scenarios, "certify_cluster", broken)
    path = write(tmp_path)
    assert main(["run", "--config", str(path)]) == 3
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    fail = report["failures"][0]
    assert fail["seed"] == 3 and fail["replay"]["forced"]


def test_oracle_mismatch_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(scenarios, "_oracle_fidelity", lambda *a: 0.5)
    path = write(tmp_path, lattice={"chains": 1, "sites_per_chain": 3, "layout": "single_chain"}, trials=1)
    assert main(["run", "--config", str(path), "--oracle"]) == 4


def test_distill_replay_recipe_reproduces_graph():
    cfg = RunConfig("distill-2d", LatticeSpec(3, 5, Layout.CMDB_2D), seed=21, trials=1)
    first = scenarios.distill_trial(cfg, 0)
    replay = dataclasses.replace(cfg, forced=first.data["outcomes"], forced_steps=first.data["forced_steps"])
    again = scenarios.distill_trial(replay, 0)
    assert again.data["report"]["graph"] == first.data["report"]["graph"]
    assert again.data["forced_steps"] == first.data["forced_steps"]


def test_oracle_crosscheck_scenario(tmp_path):
    path = write(
        tmp_path, scenario="oracle-crosscheck", lattice={"chains": 1, "sites_per_chain": 2, "layout": "single_chain"}
    )
    assert main(["run", "--config", str(path)]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["aggregate"]["exact_total"] == "1"


def test_bench_smoke(tmp_path):
    path = write(tmp_path, lattice={"chains": 2, "sites_per_chain": 6, "layout": "cmdb_2d"})
    cfg = dataclasses.replace(parse_config(path.read_text()))
    table = scenarios.bench(cfg, scaling=(4, 8, 16))
    assert table["memory_quadratic"]
    assert main(["bench", "--config", str(path)]) == 0
    assert (tmp_path / "out" / "bench.json").exists()
