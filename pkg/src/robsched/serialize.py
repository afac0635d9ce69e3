"""File formats: instance JSON, schedule JSON-lines, CSV tables, manifests.

Floats in CSV files are rendered with repr-stable "%.12g" so reruns with
the same seed produce byte-identical artifacts.  Seeds for pipeline stages
derive from the master seed through sha256, keyed by stage labels, so any
stage can be recomputed in isolation.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Instance, Job, Schedule
from .distributions import DistributionSpec


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit stage seed from a master seed and string/int labels."""
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for part in parts:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "big") >> 1


def fmt(value) -> str:
    """Canonical text form: %.12g floats, plain ints and strings."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    return str(value)


# -- instances ----------------------------------------------------------------

def instance_to_dict(instance: Instance) -> dict:
    d = {
        "n": instance.n,
        "m": instance.m,
        "deadline": float(instance.deadline),
        "jobs": [
            {"id": job.id, "p": job.p, "r": job.r, "dist": job.dist.to_json()}
            for job in instance.jobs
        ],
        "precedence": [[i, j] for i, j in instance.precedence],
    }
    if instance.id:
        d["id"] = instance.id
    return d


def instance_from_dict(d: Mapping) -> Instance:
    jobs = tuple(
        Job(id=int(j["id"]), p=float(j["p"]), r=float(j["r"]),
            dist=DistributionSpec.from_json(j["dist"]))
        for j in d["jobs"]
    )
    return Instance(
        jobs=jobs,
        m=int(d["m"]),
        precedence=tuple((int(i), int(j)) for i, j in d["precedence"]),
        deadline=float(d["deadline"]),
        id=str(d.get("id", "")),
    )


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=1,
                                     sort_keys=True) + "\n")


def load_instance(path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


# -- schedules ----------------------------------------------------------------

def schedule_record(schedule: Schedule, schedule_id: str) -> dict:
    return {
        "instance_id": schedule.instance.id,
        "schedule_id": schedule_id,
        "machine_order": [list(order) for order in schedule.machine_order],
        "start": [float(s) for s in schedule.start],
    }


def save_schedules(records: Iterable[tuple[Schedule, str]], path) -> None:
    """Write (schedule, id) pairs as one JSON object per line."""
    with open(path, "w") as fh:
        for schedule, sid in records:
            fh.write(json.dumps(schedule_record(schedule, sid), sort_keys=True))
            fh.write("\n")


def load_schedules(path, instances: Mapping[str, Instance]) -> list[tuple[Schedule, str]]:
    """Read a schedule JSON-lines file against a pool of known instances.

    Schedules of one instance that share machine sequences share one
    combined-order object, so downstream evaluation can batch them.
    """
    out: list[tuple[Schedule, str]] = []
    cache: dict[tuple, Schedule] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            inst = instances[rec["instance_id"]]
            order = tuple(tuple(int(v) for v in o) for o in rec["machine_order"])
            start = np.array(rec["start"], dtype=np.float64)
            key = (rec["instance_id"], order)
            if key in cache:
                sched = cache[key].with_starts(start)
            else:
                sched = Schedule(inst, order, start)
                cache[key] = sched
            out.append((sched, str(rec["schedule_id"])))
    return out


# -- CSV ----------------------------------------------------------------------

def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with a fixed header; every cell goes through fmt()."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], list[dict[str, str]]]:
    """Header plus row dicts, all values as text."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV, missing header row")
        return list(reader.fieldnames), list(reader)


# -- manifest -----------------------------------------------------------------

def config_hash(config: Mapping) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_manifest(path, config: Mapping, seed: int, artifacts: Sequence[str],
                  stage_seconds: Mapping[str, float],
                  failures: Mapping[str, int] | None = None) -> None:
    doc = {
        "config": dict(config),
        "config_hash": config_hash(config),
        "seed": int(seed),
        "artifacts": sorted(artifacts),
        "stage_seconds": {k: round(float(v), 6) for k, v in stage_seconds.items()},
        "generation_failures": dict(failures or {}),
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
