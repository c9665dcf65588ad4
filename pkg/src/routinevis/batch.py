"""Seeded multi-trial experiments with deterministic CSV output."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .engine import run
from .fabric import DetectorConfig
from .lineage import EngineConfig
from .metrics import MetricsReport, compute_metrics
from .workload import MicrobenchParams, Workload, generate_factory, generate_microbenchmark, load_scenario

WORKLOAD_KINDS = ("micro", "factory", "scenario")


@dataclass
class BatchConfig:
    model: str = "EV"
    scheduler: str = "timeline"
    workload: str = "micro"
    params: MicrobenchParams = field(default_factory=MicrobenchParams)
    device_count: int = 25
    fault_timing: str = "progress"
    scenario: str = "morning"
    engine: EngineConfig = field(default_factory=EngineConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)

    def __post_init__(self) -> None:
        if self.workload not in WORKLOAD_KINDS:
            raise ValueError(f"workload must be one of {WORKLOAD_KINDS}")

    def make_workload(self, seed: int) -> Workload:
        if self.workload == "micro":
            return generate_microbenchmark(self.params, self.device_count, seed, self.fault_timing)
        if self.workload == "factory":
            return generate_factory(seed)
        return load_scenario(self.scenario, seed)


def trial_seed(base_seed: int, i: int) -> int:
    return base_seed ^ i


CSV_COLUMNS = ["trial", "seed"] + [f.name for f in fields(MetricsReport) if f.name != "extra"]


def run_trial(cfg: BatchConfig, seed: int) -> MetricsReport:
    w = cfg.make_workload(seed)
    res = run(cfg.model, w, scheduler=cfg.scheduler, config=cfg.engine, detector=cfg.detector)
    return compute_metrics(res, w)


def _trial(args: tuple[BatchConfig, int, int]) -> dict[str, Any]:
    cfg, i, seed = args
    return {"trial": i, "seed": seed, **run_trial(cfg, seed).as_row()}


@dataclass
class BatchResult:
    rows: list[dict[str, Any]]
    summary: dict[str, float]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _cell(row[k]) for k in CSV_COLUMNS})
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _cell(v: Any) -> Any:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def aggregate(rows: list[dict[str, Any]]) -> dict[str, float]:
    """Per-metric mean across trials, plus percentiles of the per-trial p50
    latency."""
    out: dict[str, float] = {"trials": float(len(rows))}
    for col in CSV_COLUMNS[2:]:
        vals = [r[col] for r in rows if isinstance(r[col], (int, float)) and not isinstance(r[col], bool)]
        if vals:
            out[f"{col}_mean"] = float(np.mean(vals))
    p50s = [r["latency_p50"] for r in rows]
    for q in (50, 90, 95):
        out[f"latency_p50_p{q}"] = float(np.percentile(p50s, q))
    return out


def run_batch(cfg: BatchConfig, trials: int, base_seed: int = 0, workers: int = 1) -> BatchResult:
    """Run ``trials`` independent trials; trial ``i`` uses seed ``base_seed ^ i``.

    Results are ordered by trial index whatever the pool size, so the CSV is
    byte-identical for any ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [(cfg, i, trial_seed(base_seed, i)) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        rows = [_trial(j) for j in jobs]
    return BatchResult(rows, aggregate(rows))


def config_doc(cfg: BatchConfig) -> dict[str, Any]:
    return asdict(cfg)
