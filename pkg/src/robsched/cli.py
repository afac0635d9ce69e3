"""Subcommand pipeline: generate, evaluate, correlate, compare, time.

Every stage is a plain function over an output directory tree:

    out/
      manifest.json             config hash, seeds, artifacts, stage times
      instances/<iid>.json
      schedules/<iid>.jsonl     97 buffered variants per kept start schedule
      eval/<dist>/<iid>_sim.csv, <iid>_measures.csv
      correlate/<dist>/correlations.csv, summary.csv, box_<sim>.svg
      compare/mwu.csv
      timing/timings.csv

Seeds for each stage derive from the master seed and stable string labels,
so a rerun with the same config writes byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .distributions import KINDS, DistributionSpec
from .generate import (BufferPlan, GenerationError, InstanceGenConfig,
                       diversify_buffers, gen_earliest_start, gen_instance)
from .measures import MEASURE_IDS, MeasureConfig, evaluate_population, time_measures
from .serialize import (derive_seed, load_instance, load_schedules, read_csv,
                        save_instance, save_manifest, save_schedules, write_csv)
from .simulate import simulate
from .stats import correlation_study, mann_whitney_u
from .svgplot import box_plot_svg

DIST_ALIASES = {
    "N25": ("normal", 0.25),
    "N50": ("normal", 0.50),
    "LN25": ("lognormal", 0.25),
    "LN50": ("lognormal", 0.50),
    "EXP": ("exponential", 1.0),
}

SIM_COLUMNS = ("avg_makespan", "frac_within_deadline", "avg_frac_on_time",
               "avg_total_delay")

#: (n, n_arcs, m, replicates) rows of the default instance grid
SMALL_GRID = (
    (30, 15, 4, 2), (30, 30, 4, 2), (30, 75, 4, 2),
    (30, 15, 8, 2), (30, 30, 8, 2), (30, 75, 8, 2),
)
LARGE_GRID = (
    (100, 50, 6, 2), (100, 100, 6, 2), (100, 250, 6, 2),
    (100, 50, 12, 2), (100, 100, 12, 2), (100, 250, 12, 2),
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Pipeline settings; the defaults run the small instance grid."""

    grid: tuple[tuple[int, int, int, int], ...] = SMALL_GRID
    schedules_per_instance: int = 10
    replications: int = 1000
    dists: tuple[str, ...] = ("N25", "LN25", "EXP")
    lambda_q: float = 0.7
    gen_kind: str = "normal"
    gen_cv: float = 0.25
    max_restarts: int = 20
    seed: int = 987654321

    def fast(self) -> "ExperimentConfig":
        """Reduced profile: one replicate per cell, 3 start schedules, R=100."""
        grid = tuple((n, a, m, 1) for n, a, m, _ in self.grid)
        return replace(self, grid=grid, schedules_per_instance=3,
                       replications=100, dists=("N25",))

    def to_dict(self) -> dict:
        return {
            "grid": [list(cell) for cell in self.grid],
            "schedules_per_instance": self.schedules_per_instance,
            "replications": self.replications,
            "dists": list(self.dists),
            "lambda_q": self.lambda_q,
            "gen_kind": self.gen_kind,
            "gen_cv": self.gen_cv,
            "max_restarts": self.max_restarts,
            "seed": self.seed,
        }


def load_config(path=None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is None:
        return cfg
    doc = json.loads(Path(path).read_text())
    known = set(cfg.to_dict())
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(doc)
    if "grid" in kwargs:
        kwargs["grid"] = tuple(tuple(int(v) for v in cell) for cell in kwargs["grid"])
    if "dists" in kwargs:
        kwargs["dists"] = tuple(str(d) for d in kwargs["dists"])
    return replace(cfg, **kwargs)


def parse_dist(label: str) -> tuple[str, str, float]:
    """Resolve a distribution flag to (directory label, kind, cv).

    Accepts the shorthand names (N25, N50, LN25, LN50, EXP) or ``kind:cv``.
    """
    if label.upper() in DIST_ALIASES:
        kind, cv = DIST_ALIASES[label.upper()]
        return label.upper(), kind, cv
    if ":" in label:
        kind, _, cv_text = label.partition(":")
        kind = kind.lower()
        if kind not in KINDS:
            raise ValueError(f"unknown distribution kind {kind!r}")
        cv = float(cv_text)
        return f"{kind}_cv{cv:g}", kind, cv
    raise ValueError(f"cannot parse distribution {label!r} (use N25/LN25/... or kind:cv)")


def _instance_ids(config: ExperimentConfig) -> list[str]:
    out = []
    for n, arcs, m, reps in config.grid:
        for k in range(reps):
            out.append(f"n{n}_r{arcs}_m{m}_rep{k}")
    return out


def _parse_measures(text: str | None) -> tuple[str, ...] | None:
    if not text:
        return None
    mids = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [m for m in mids if m not in MEASURE_IDS]
    if unknown:
        raise ValueError(f"unknown measures: {unknown}")
    return mids


# -- stages -------------------------------------------------------------------

def cmd_gen(config: ExperimentConfig, out: Path) -> tuple[list[str], dict[str, int]]:
    """Generate instances and their buffered schedule populations."""
    inst_dir = out / "instances"
    sched_dir = out / "schedules"
    inst_dir.mkdir(parents=True, exist_ok=True)
    sched_dir.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []
    failures: dict[str, int] = {}
    plan = BufferPlan.default()
    for n, arcs, m, reps in config.grid:
        for k in range(reps):
            iid = f"n{n}_r{arcs}_m{m}_rep{k}"
            gen_cfg = InstanceGenConfig(n=n, m=m, n_arcs=arcs,
                                        dist_kind=config.gen_kind,
                                        cv=config.gen_cv, id=iid)
            inst = gen_instance(gen_cfg, derive_seed(config.seed, "instance", iid))
            save_instance(inst, inst_dir / f"{iid}.json")
            artifacts.append(f"instances/{iid}.json")
            records = []
            for s in range(config.schedules_per_instance):
                try:
                    ess = gen_earliest_start(inst, derive_seed(config.seed, "ess", iid, s),
                                             max_restarts=config.max_restarts)
                except GenerationError:
                    failures[iid] = failures.get(iid, 0) + 1
                    continue
                variants = diversify_buffers(ess, plan,
                                             derive_seed(config.seed, "buffers", iid, s))
                for b, sched in enumerate(variants):
                    records.append((sched, f"{iid}_s{s:02d}_b{b:02d}"))
            save_schedules(records, sched_dir / f"{iid}.jsonl")
            artifacts.append(f"schedules/{iid}.jsonl")
    return artifacts, failures


def _measure_columns(measures: tuple[str, ...] | None) -> tuple[str, ...]:
    return measures if measures else MEASURE_IDS


def cmd_eval(config: ExperimentConfig, out: Path, dist_labels,
             measures: tuple[str, ...] | None = None) -> list[str]:
    """Simulate and measure every stored schedule under each duration law."""
    artifacts: list[str] = []
    inst_files = sorted((out / "instances").glob("*.json"))
    if not inst_files:
        raise FileNotFoundError(f"no instances under {out / 'instances'}; run gen first")
    mids = _measure_columns(measures)
    for inst_file in inst_files:
        inst = load_instance(inst_file)
        iid = inst.id or inst_file.stem
        pairs = load_schedules(out / "schedules" / f"{iid}.jsonl", {iid: inst})
        if not pairs:
            continue
        scheds = [sched for sched, _ in pairs]
        for label, kind, cv in dist_labels:
            dists = tuple(DistributionSpec(kind, job.p, cv) for job in inst.jobs)
            mcfg = MeasureConfig(measures=measures, lambda_q=config.lambda_q,
                                 dists=dists)
            vectors = evaluate_population(scheds, mcfg)
            ddir = out / "eval" / label
            ddir.mkdir(parents=True, exist_ok=True)

            mrows = []
            for (sched, sid), vec in zip(pairs, vectors):
                mrows.append([sid] + [vec.values.get(mid, float("nan")) for mid in mids])
            write_csv(ddir / f"{iid}_measures.csv", ["schedule_id", *mids], mrows)

            srows = []
            for sched, sid in pairs:
                seed = derive_seed(config.seed, "sim", label, sid)
                rep = simulate(sched, dists=dists, replications=config.replications,
                               seed=seed)
                srows.append([sid, rep.replications, rep.seed, rep.avg_makespan,
                              rep.frac_within_deadline, rep.avg_frac_on_time,
                              rep.avg_total_delay])
            write_csv(ddir / f"{iid}_sim.csv",
                      ["schedule_id", "replications", "seed", *SIM_COLUMNS], srows)
            artifacts.append(f"eval/{label}/{iid}_measures.csv")
            artifacts.append(f"eval/{label}/{iid}_sim.csv")
    return artifacts


def cmd_correlate(out: Path, dist_labels) -> list[str]:
    """Per-instance Spearman tables and cross-instance box-plot data."""
    artifacts: list[str] = []
    for label, _, _ in dist_labels:
        eval_dir = out / "eval" / label
        measure_files = sorted(eval_dir.glob("*_measures.csv"))
        if not measure_files:
            raise FileNotFoundError(f"no evaluation output under {eval_dir}")
        measure_series: dict[str, dict[str, list[float]]] = {}
        sim_series: dict[str, dict[str, list[float]]] = {}
        for mfile in measure_files:
            iid = mfile.name[: -len("_measures.csv")]
            mhead, mrows = read_csv(mfile)
            shead, srows = read_csv(eval_dir / f"{iid}_sim.csv")
            for head, rows, need in ((mhead, mrows, "schedule_id"),
                                     (shead, srows, "schedule_id")):
                if need not in head:
                    raise ValueError(f"{iid}: missing column {need!r}")
            order = [row["schedule_id"] for row in mrows]
            if order != [row["schedule_id"] for row in srows]:
                raise ValueError(f"{iid}: measure and simulation rows disagree")
            measure_series[iid] = {
                col: [float(row[col]) for row in mrows]
                for col in mhead if col != "schedule_id"
            }
            sim_series[iid] = {
                col: [float(row[col]) for row in srows] for col in SIM_COLUMNS
                if col in shead
            }
        table = correlation_study(measure_series, sim_series)
        cdir = out / "correlate" / label
        cdir.mkdir(parents=True, exist_ok=True)
        write_csv(cdir / "correlations.csv",
                  ["instance_id", "rm", "sim_measure", "rho", "abs_rho", "degenerate"],
                  [[r.instance_id, r.rm, r.sim_measure, r.rho, abs(r.rho), r.degenerate]
                   for r in table.rows])
        write_csv(cdir / "summary.csv",
                  ["rm", "sim_measure", "min", "q1", "median", "q3", "max", "mean",
                   "n_instances", "high_corr"],
                  [[s.rm, s.sim_measure, s.min, s.q1, s.median, s.q3, s.max, s.mean,
                    s.n_instances, s.high_corr] for s in table.summaries])
        artifacts.append(f"correlate/{label}/correlations.csv")
        artifacts.append(f"correlate/{label}/summary.csv")
        for sim in SIM_COLUMNS:
            groups = [(s.rm, (s.min, s.q1, s.median, s.q3, s.max))
                      for s in table.summaries
                      if s.sim_measure == sim and s.n_instances > 0]
            if not groups:
                continue
            svg = box_plot_svg(groups, title=f"|rho| vs {sim} ({label})",
                               ylabel="|rho|")
            (cdir / f"box_{sim}.svg").write_text(svg)
            artifacts.append(f"correlate/{label}/box_{sim}.svg")
    return artifacts


def cmd_compare(file_a, file_b, out: Path) -> list[str]:
    """Mann-Whitney U per simulation column between two populations."""
    head_a, rows_a = read_csv(file_a)
    head_b, rows_b = read_csv(file_b)
    cols = [c for c in SIM_COLUMNS if c in head_a and c in head_b]
    if not cols:
        raise ValueError("no shared simulation columns between the two files")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for col in cols:
        a = [float(r[col]) for r in rows_a]
        b = [float(r[col]) for r in rows_b]
        res = mann_whitney_u(a, b)
        rows.append([col, res.u, res.p_value, res.n1, res.n2, res.method])
    write_csv(out / "mwu.csv",
              ["sim_measure", "u", "p_value", "n1", "n2", "method"], rows)
    return ["compare/mwu.csv"]


def cmd_time(config: ExperimentConfig, out: Path, dist_labels,
             measures: tuple[str, ...] | None = None) -> list[str]:
    """Wall clock per measure over the first instance's population."""
    inst_files = sorted((out / "instances").glob("*.json"))
    if not inst_files:
        raise FileNotFoundError(f"no instances under {out / 'instances'}; run gen first")
    inst = load_instance(inst_files[0])
    iid = inst.id or inst_files[0].stem
    pairs = load_schedules(out / "schedules" / f"{iid}.jsonl", {iid: inst})
    scheds = [sched for sched, _ in pairs]
    label, kind, cv = dist_labels[0]
    dists = tuple(DistributionSpec(kind, job.p, cv) for job in inst.jobs)
    mids = _measure_columns(measures)
    mcfg = MeasureConfig(measures=measures, lambda_q=config.lambda_q, dists=dists)
    timings = time_measures(scheds, mids, mcfg, baseline_replications=100,
                            seed=derive_seed(config.seed, "timing", iid))
    tdir = out / "timing"
    tdir.mkdir(parents=True, exist_ok=True)
    ns = max(len(scheds), 1)
    write_csv(tdir / "timings.csv",
              ["measure", "seconds_total", "ms_per_schedule", "n_schedules", "dist"],
              [[mid, sec, 1000.0 * sec / ns, len(scheds), label]
               for mid, sec in timings.items()])
    return ["timing/timings.csv"]


def cmd_pipeline(config: ExperimentConfig, out: Path, dist_labels,
                 measures: tuple[str, ...] | None = None) -> None:
    """gen -> eval -> correlate -> time, then the manifest."""
    artifacts: list[str] = []
    stage_seconds: dict[str, float] = {}
    t = time.perf_counter()
    gen_artifacts, failures = cmd_gen(config, out)
    stage_seconds["gen"] = time.perf_counter() - t
    artifacts += gen_artifacts

    t = time.perf_counter()
    artifacts += cmd_eval(config, out, dist_labels, measures)
    stage_seconds["eval"] = time.perf_counter() - t

    t = time.perf_counter()
    artifacts += cmd_correlate(out, dist_labels)
    stage_seconds["correlate"] = time.perf_counter() - t

    t = time.perf_counter()
    artifacts += cmd_time(config, out, dist_labels, measures)
    stage_seconds["time"] = time.perf_counter() - t

    save_manifest(out / "manifest.json", config.to_dict(), config.seed,
                  artifacts, stage_seconds, failures)


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robsched",
        description="Schedule robustness workbench: generation, surrogate "
                    "measures, simulation, correlation study.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dists=True):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--fast", action="store_true",
                       help="reduced profile: 1 replicate per grid cell, "
                            "3 start schedules, 100 replications")
        if dists:
            p.add_argument("--dist", action="append", default=None,
                           help="duration law: N25, N50, LN25, LN50, EXP or kind:cv "
                                "(repeatable)")

    p = sub.add_parser("gen", help="generate instances and schedule populations")
    common(p, dists=False)

    p = sub.add_parser("eval", help="simulate and measure stored schedules")
    common(p)
    p.add_argument("--measures", default=None,
                   help="comma-separated measure subset (default: all)")

    p = sub.add_parser("correlate", help="Spearman tables from eval output")
    common(p)

    p = sub.add_parser("compare", help="Mann-Whitney U between two sim CSVs")
    p.add_argument("sim_a", help="first simulation CSV")
    p.add_argument("sim_b", help="second simulation CSV")
    p.add_argument("--out", default="out", help="output directory (default: out)")

    p = sub.add_parser("time", help="per-measure wall clock over one population")
    common(p)
    p.add_argument("--measures", default=None,
                   help="comma-separated measure subset (default: all)")

    p = sub.add_parser("pipeline", help="gen + eval + correlate + time + manifest")
    common(p)
    p.add_argument("--measures", default=None,
                   help="comma-separated measure subset (default: all)")
    return parser


def _resolve(args) -> tuple[ExperimentConfig, Path, list[tuple[str, str, float]]]:
    config = load_config(args.config)
    if args.fast:
        config = config.fast()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    labels = args.dist if getattr(args, "dist", None) else list(config.dists)
    return config, Path(args.out), [parse_dist(lbl) for lbl in labels]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            cmd_compare(Path(args.sim_a), Path(args.sim_b), Path(args.out) / "compare")
            return 0
        config, out, dist_labels = _resolve(args)
        measures = _parse_measures(getattr(args, "measures", None))
        if args.command == "gen":
            out.mkdir(parents=True, exist_ok=True)
            artifacts, failures = cmd_gen(config, out)
            save_manifest(out / "manifest.json", config.to_dict(), config.seed,
                          artifacts, {}, failures)
        elif args.command == "eval":
            cmd_eval(config, out, dist_labels, measures)
        elif args.command == "correlate":
            cmd_correlate(out, dist_labels)
        elif args.command == "time":
            cmd_time(config, out, dist_labels, measures)
        elif args.command == "pipeline":
            out.mkdir(parents=True, exist_ok=True)
            cmd_pipeline(config, out, dist_labels, measures)
        return 0
    except (ValueError, FileNotFoundError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
