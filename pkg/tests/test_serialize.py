import json

import numpy as np
import pytest

from robsched.serialize import (
    config_hash,
    derive_seed,
    fmt,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    load_manifest,
    load_schedules,
    read_csv,
    save_instance,
    save_manifest,
    save_schedules,
    write_csv,
)
from robsched.generate import InstanceGenConfig, gen_earliest_start, gen_instance

from util import make_instance, two_job


def test_derive_seed_is_stable_and_distinct():
    a = derive_seed(987654321, "instance", "n30", 0)
    assert a == derive_seed(987654321, "instance", "n30", 0)
    assert a != derive_seed(987654321, "instance", "n30", 1)
    assert a != derive_seed(987654320, "instance", "n30", 0)
    assert 0 <= a < 2**63
    # usable directly as a generator seed
    np.random.default_rng(a)


def test_fmt_values():
    assert fmt(1.0) == "1"
    assert fmt(0.1) == "0.1"
    assert fmt(1.0 / 3.0) == "0.333333333333"
    assert fmt(True) == "True"
    assert fmt(7) == "7"
    assert fmt("x") == "x"


def test_instance_roundtrip(tmp_path):
    inst = make_instance((3.0, 4.0), m=2, prec=((0, 1),), deadline=9.5,
                         r=(0.0, 1.0), kind="lognormal", cv=0.5)
    d = instance_to_dict(inst)
    back = instance_from_dict(json.loads(json.dumps(d)))
    assert back.jobs == inst.jobs
    assert back.precedence == inst.precedence
    assert back.m == inst.m and back.deadline == inst.deadline

    path = tmp_path / "inst.json"
    save_instance(inst, path)
    assert load_instance(path).jobs == inst.jobs


def test_schedule_roundtrip_shares_combined(tmp_path):
    inst = gen_instance(InstanceGenConfig(n=8, m=2, n_arcs=5, id="demo"), seed=1)
    base = gen_earliest_start(inst, seed=1)
    shifted = base.with_starts(base.start + 1.0)
    path = tmp_path / "schedules.jsonl"
    save_schedules([(base, "s00"), (shifted, "s01")], path)

    loaded = load_schedules(path, {"demo": inst})
    assert [sid for _, sid in loaded] == ["s00", "s01"]
    np.testing.assert_allclose(loaded[0][0].start, base.start)
    np.testing.assert_allclose(loaded[1][0].start, shifted.start)
    # same machine sequences share one combined order for batching
    assert loaded[0][0].combined is loaded[1][0].combined


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], [[1.5, "x"], [2.0, "y"]])
    header, rows = read_csv(path)
    assert header == ["a", "b"]
    assert rows == [{"a": "1.5", "b": "x"}, {"a": "2", "b": "y"}]
    # trailing newline and unix line endings keep byte output portable
    raw = path.read_bytes()
    assert raw == b"a,b\n1.5,x\n2,y\n"


def test_read_csv_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ValueError):
        read_csv(path)


def test_manifest_roundtrip(tmp_path):
    path = tmp_path / "manifest.json"
    cfg = {"replications": 10, "grid": [[6, 4, 2, 1]]}
    save_manifest(path, cfg, seed=5, artifacts=["b.csv", "a.csv"],
                  stage_seconds={"gen": 0.1234567}, failures={"i1": 2})
    doc = load_manifest(path)
    assert doc["config"] == cfg
    assert doc["config_hash"] == config_hash(cfg)
    assert doc["artifacts"] == ["a.csv", "b.csv"]
    assert doc["stage_seconds"]["gen"] == 0.123457
    assert doc["generation_failures"] == {"i1": 2}


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_save_schedules_is_deterministic(tmp_path):
    sched = two_job()
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_schedules([(sched, "s")], p1)
    save_schedules([(sched, "s")], p2)
    assert p1.read_bytes() == p2.read_bytes()
