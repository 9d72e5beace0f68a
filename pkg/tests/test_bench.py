import csv
import io
import json

import pytest

from fixtures import diagonal_instance
from xmapf.bench import (
    RECORD_COLUMNS,
    SUMMARY_COLUMNS,
    AlgoSpec,
    ExperimentConfig,
    InstanceSpec,
    RunRecord,
    aggregate,
    random_instance,
    read_records_csv,
    records_csv,
    run_protocol,
    run_suite,
    summary_csv,
)
from xmapf.world import INF, GridWorld, Instance, goal_distance_field


def _rec(outcome, index=None, t=1.0, agents=4, algo="xg-cbs/xg", phase="best", soc=None):
    soc = soc if soc is not None else (None if index is None else 4 * index)
    return RunRecord(
        "i", "9x9", agents, algo, phase, outcome, INF, index, soc,
        None if soc is None else soc / agents, None if index is None else 5, t, 3,
    )


def test_protocol_improves_then_fails():
    out = run_protocol(diagonal_instance(), AlgoSpec("xg"), budget=200, instance_id="diag")
    assert out.baseline.index == 3
    assert out.first.bound == 3 and out.first.solved
    assert out.best.index == 2
    last = out.attempts[-1]
    assert last.bound == out.best.index - 1 and last.outcome in ("unsolvable", "timeout")
    assert out.best.index <= out.first.index <= out.baseline.index


def test_protocol_index_one_stops_at_zero():
    inst = Instance.from_pairs(GridWorld(3, 3), [((0, 0), (2, 0)), ((0, 2), (2, 2))])
    out = run_protocol(inst, budget=50)
    assert out.baseline.index == 1
    assert out.first.bound == 1 and out.first.index == 1
    assert out.best.index == 1
    assert out.attempts[-1].bound == 0 and out.attempts[-1].outcome == "unsolvable"
    assert out.attempts[-1].expanded == 0


def test_protocol_cbs_timeout_starts_unbounded():
    inst = diagonal_instance()
    timed_out = RunRecord("d", "3x3", 2, "cbs", "baseline", "timeout", INF)
    out = run_protocol(inst, AlgoSpec("xg"), budget=200, baseline=timed_out)
    assert out.first.bound == INF and out.first.solved
    assert out.best.index == 2


def test_protocol_everything_times_out():
    out = run_protocol(diagonal_instance(), budget=0)
    assert out.baseline.outcome == "timeout"
    assert out.first.bound == INF and out.first.outcome == "timeout"
    assert out.best.outcome == "timeout" and out.best.phase == "best"


def test_aggregate_all_index_one():
    rows = aggregate([_rec("solved", 1), _rec("solved", 1)])
    assert len(rows) == 1
    assert rows[0]["success_rate"] == 1.0 and rows[0]["mean_index"] == 1.0


def test_aggregate_half_timeouts():
    rows = aggregate([_rec("solved", 2, t=1.0), _rec("timeout", t=300.0),
                      _rec("solved", 4, t=3.0), _rec("timeout", t=300.0)])
    (row,) = rows
    assert row["runs"] == 4 and row["solved"] == 2
    assert row["success_rate"] == 0.5
    assert row["mean_index"] == 3.0
    assert row["mean_time"] == 2.0
    assert row["mean_avg_cost"] == 3.0


def test_aggregate_groups_and_orders():
    recs = [
        _rec("solved", 2, algo="xg-cbs/sr", phase="first"),
        _rec("solved", 5, algo="cbs", phase="baseline"),
        _rec("solved", 1, agents=6),
        _rec("solved", 2, phase="first"),
    ]
    keys = [(r["agents"], r["algorithm"], r["phase"]) for r in aggregate(recs)]
    assert keys == [
        (4, "cbs", "baseline"),
        (4, "xg-cbs/sr", "first"),
        (4, "xg-cbs/xg", "first"),
        (6, "xg-cbs/xg", "best"),
    ]


def test_summary_matches_independent_recomputation():
    recs = [
        _rec("solved", 2, t=0.5, soc=9), _rec("solved", 3, t=1.5, soc=11),
        _rec("timeout", t=300.0), _rec("unsolvable", t=2.0),
        _rec("solved", 7, t=0.1, algo="cbs", phase="baseline", soc=8),
    ]
    text = records_csv(recs)
    summary = list(csv.DictReader(io.StringIO(summary_csv(read_records_csv(text)))))
    # recompute straight from the raw CSV
    raw = list(csv.DictReader(io.StringIO(text)))
    for row in summary:
        grp = [r for r in raw if (r["grid"], r["agents"], r["algorithm"], r["phase"]) ==
               (row["grid"], row["agents"], row["algorithm"], row["phase"])]
        ok = [r for r in grp if r["outcome"] == "solved"]
        assert int(row["runs"]) == len(grp)
        assert float(row["success_rate"]) == pytest.approx(len(ok) / len(grp))
        assert float(row["mean_index"]) == pytest.approx(sum(int(r["index"]) for r in ok) / len(ok))
        assert float(row["mean_time"]) == pytest.approx(sum(float(r["wall_time"]) for r in ok) / len(ok))
        assert float(row["mean_avg_cost"]) == pytest.approx(
            sum(float(r["avg_cost"]) for r in ok) / len(ok)
        )


def test_csv_columns_and_round_trip():
    recs = [_rec("solved", 2), _rec("timeout")]
    text = records_csv(recs)
    assert text.splitlines()[0] == ",".join(RECORD_COLUMNS)
    assert read_records_csv(text) == recs
    assert summary_csv(recs).splitlines()[0] == ",".join(SUMMARY_COLUMNS)


def test_random_instance_is_seeded_and_reachable():
    a = random_instance(9, 6, seed=3, density=0.2)
    assert a == random_instance(9, 6, seed=3, density=0.2)
    assert a != random_instance(9, 6, seed=4, density=0.2)
    for t in a.tasks:
        assert goal_distance_field(a.world, t.goal)[t.start] != INF


def test_config_from_json(tmp_path):
    suite = {
        "per_run_timeout": 10,
        "seed": 7,
        "algorithms": [{"low": "xg"}, {"low": "wxg", "weight": 0.5}],
        "instances": [{"map": "m.map", "scen": "m.scen", "agents": 3}],
        "generate": [{"size": 9, "agents": [2, 4], "count": 2}],
    }
    cfg = ExperimentConfig.from_json(json.dumps(suite), str(tmp_path))
    assert cfg.per_run_timeout == 10
    assert [a.algorithm_id for a in cfg.algorithms] == ["xg-cbs/xg", "xg-cbs/wxg@0.5"]
    assert len(cfg.instances) == 5
    assert cfg.instances[0].map == str(tmp_path / "m.map")
    assert [s.agents for s in cfg.instances[1:]] == [2, 2, 4, 4]
    again = ExperimentConfig.from_json(json.dumps(suite), str(tmp_path))
    assert again.instances == cfg.instances


def test_config_rejects_bad_timeout():
    with pytest.raises(ValueError):
        ExperimentConfig(per_run_timeout=0)


def test_suite_parallel_matches_serial():
    specs = [InstanceSpec(2, size=4, seed=s) for s in range(4)]
    cfg = ExperimentConfig(specs, [AlgoSpec("xg"), AlgoSpec("sr")], 60.0, 0, test_budget=10)
    serial = run_suite(cfg, jobs=1)
    parallel = run_suite(cfg, jobs=2)
    strip = [r.__class__(**{**r.__dict__, "wall_time": 0.0}) for r in serial]
    strip_p = [r.__class__(**{**r.__dict__, "wall_time": 0.0}) for r in parallel]
    assert strip == strip_p
    assert len(serial) == 4 * (1 + 2 * 2)
    assert [r.phase for r in serial[:5]] == ["baseline", "first", "best", "first", "best"]
