"""Benchmark harness: initialise, run K-Modes, and tabulate SD / iterations / time."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import CategoricalDataset, ContractError
from .engine import ClusterModel, EngineConfig, kmodes_fit
from .init import METHODS, InitMethod, initial_centers

FORMATS = ("csv", "json", "plot")
AGGREGATES = ("none", "mean", "min")
COLUMNS = ("method", "k", "seed", "n", "total_distance", "sd", "iterations", "converged",
           "init_time", "total_time", "error")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunSpec:
    method: str
    k: int
    seeds: tuple[int, ...] = ()
    config: EngineConfig = field(default_factory=EngineConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.k < 1:
            raise ContractError("k must be >= 1")
        if self.method == "random" and not self.seeds:
            raise ContractError("random init needs at least one seed")

    def runs(self) -> list[tuple[str, int, int | None]]:
        if self.method == "random":
            return [(self.method, self.k, s) for s in self.seeds]
        return [(self.method, self.k, None)]


@dataclass
class RunRecord:
    method: str
    k: int
    seed: int | str | None
    n: int
    total_distance: int | None
    iterations: float | None
    converged: bool | None
    init_time: float
    total_time: float
    error: str | None = None
    sd_value: Fraction | None = None

    @property
    def sd(self) -> Fraction | None:
        if self.sd_value is not None:
            return self.sd_value
        if self.total_distance is None or not self.n:
            return None
        return Fraction(self.total_distance, self.n)

    @property
    def failed(self) -> bool:
        return self.error is not None

    def key(self) -> tuple:
        """Every field that must be reproducible (timings excluded)."""
        return (self.method, self.k, self.seed, self.n, self.total_distance, self.iterations,
                self.converged, self.error)


@dataclass
class BenchmarkReport:
    records: list[RunRecord] = field(default_factory=list)

    @property
    def any_failed(self) -> bool:
        return any(r.failed for r in self.records)

    def __len__(self):
        return len(self.records)


def run_once(dataset: CategoricalDataset, method: str, k: int, seed: int | None = None,
             config: EngineConfig | None = None) -> tuple[RunRecord, ClusterModel | None]:
    """One initialiser + K-Modes run.  Initialiser failures become an error record."""
    config = config or EngineConfig()
    start = time.perf_counter()
    try:
        centers = initial_centers(dataset, InitMethod(method, seed), k, config)
    except (ContractError, ValueError) as exc:
        elapsed = time.perf_counter() - start
        return RunRecord(method, k, seed, dataset.n, None, None, None, elapsed, elapsed,
                         error=f"{method} init failed for k={k}: {exc}"), None
    init_done = time.perf_counter()
    model = kmodes_fit(dataset, centers, config)
    end = time.perf_counter()
    record = RunRecord(method, k, seed, dataset.n, model.total_distance, model.iterations,
                       model.converged, init_done - start, end - start)
    return record, model


def matrix_specs(methods: Sequence[str], ks: Sequence[int], seeds: Sequence[int],
                 config: EngineConfig | None = None) -> list[RunSpec]:
    config = config or EngineConfig()
    return [RunSpec(m, k, tuple(seeds) if m == "random" else (), config)
            for m in methods for k in ks]


def run_matrix(dataset: CategoricalDataset, specs: Iterable[RunSpec], parallel_runs: int = 1,
               dump_dir=None) -> BenchmarkReport:
    """Run every (method, k, seed) of ``specs``; records keep spec order."""
    jobs = [(run, spec.config) for spec in specs for run in spec.runs()]

    def one(job):
        (method, k, seed), config = job
        record, model = run_once(dataset, method, k, seed, config)
        if dump_dir is not None and model is not None:
            name = f"{method}-k{k}" + (f"-s{seed}" if seed is not None else "") + ".json"
            dump_model(model, record, Path(dump_dir) / name)
        return record

    if parallel_runs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=parallel_runs) as pool:
            records = list(pool.map(one, jobs))
    else:
        records = [one(j) for j in jobs]
    return BenchmarkReport(records)


def dump_model(model: ClusterModel, record: RunRecord, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({
        "method": record.method, "k": model.k, "seed": record.seed, "n": model.n,
        "total_distance": model.total_distance, "iterations": model.iterations,
        "converged": model.converged, "centers": model.centers.tolist(),
        "assignments": model.assignments.tolist(),
    }) + "\n")


def load_model(path) -> ClusterModel:
    obj = json.loads(Path(path).read_text())
    return ClusterModel(obj["k"], np.asarray(obj["centers"], dtype=np.uint8),
                        np.asarray(obj["assignments"], dtype=np.int64),
                        obj["total_distance"], obj["iterations"], obj["converged"])


def format_sd(sd: Fraction | None) -> str:
    if sd is None:
        return ""
    return str((Decimal(sd.numerator) / Decimal(sd.denominator)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP))


def _fmt_time(t: float) -> str:
    return f"{t:.4f}"


def _fmt_iter(it) -> str:
    if it is None:
        return ""
    if float(it).is_integer():
        return str(int(it))
    return f"{it:.2f}"


def aggregate(report: BenchmarkReport, how: str = "none") -> BenchmarkReport:
    """Collapse multi-seed groups (same method and k) to their mean or minimum-SD row."""
    if how not in AGGREGATES:
        raise UsageError(f"unknown aggregate {how!r}; choose from {AGGREGATES}")
    if how == "none":
        return report
    groups: dict[tuple, list[RunRecord]] = {}
    for r in report.records:
        groups.setdefault((r.method, r.k), []).append(r)
    out = []
    for (method, k), rows in groups.items():
        ok = [r for r in rows if not r.failed]
        if len(rows) == 1 or not ok:
            out.extend(rows)
            continue
        if how == "min":
            best = min(ok, key=lambda r: (r.sd, rows.index(r)))
            out.append(RunRecord(**{**best.__dict__, "seed": f"min({best.seed})"}))
            continue
        sd = sum((r.sd for r in ok), Fraction(0)) / len(ok)
        out.append(RunRecord(
            method, k, "mean", ok[0].n, None,
            sum(r.iterations for r in ok) / len(ok),
            all(r.converged for r in ok),
            sum(r.init_time for r in ok) / len(ok),
            sum(r.total_time for r in ok) / len(ok),
            sd_value=sd))
    return BenchmarkReport(out)


def _row(r: RunRecord) -> dict:
    return {
        "method": r.method,
        "k": r.k,
        "seed": "" if r.seed is None else r.seed,
        "n": r.n,
        "total_distance": "" if r.total_distance is None else r.total_distance,
        "sd": format_sd(r.sd),
        "iterations": _fmt_iter(r.iterations),
        "converged": "" if r.converged is None else str(r.converged).lower(),
        "init_time": _fmt_time(r.init_time),
        "total_time": _fmt_time(r.total_time),
        "error": r.error or "",
    }


def _json_row(r: RunRecord) -> dict:
    sd = r.sd
    return {
        "method": r.method, "k": r.k, "seed": r.seed, "n": r.n,
        "total_distance": r.total_distance,
        "sd": None if sd is None else float(format_sd(sd)),
        "iterations": r.iterations, "converged": r.converged,
        "init_time": round(r.init_time, 4), "total_time": round(r.total_time, 4),
        "error": r.error,
    }


def plot_data(report: BenchmarkReport) -> dict:
    """Per-series (K, SD) and (K, time) points; random seeds are separate series."""
    series: dict[str, dict[str, list]] = {}
    for r in report.records:
        if r.failed:
            continue
        label = r.method if r.seed is None else f"{r.method}[{r.seed}]"
        s = series.setdefault(label, {"k": [], "sd": [], "time": []})
        s["k"].append(r.k)
        s["sd"].append(float(format_sd(r.sd)))
        s["time"].append(round(r.total_time, 4))
    return {"series": series}


def emit_report(report: BenchmarkReport, fmt: str = "csv", how: str = "none") -> bytes:
    if fmt not in FORMATS:
        raise UsageError(f"unknown format {fmt!r}; choose from {FORMATS}")
    report = aggregate(report, how)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in report.records:
            w.writerow(_row(r))
        return buf.getvalue().encode()
    if fmt == "json":
        payload = {"columns": list(COLUMNS), "records": [_json_row(r) for r in report.records]}
    else:
        payload = plot_data(report)
    return (json.dumps(payload, indent=2) + "\n").encode()


def load_report(path) -> BenchmarkReport:
    """Read a report previously written with ``emit_report(..., "json")``."""
    obj = json.loads(Path(path).read_text())
    records = []
    for row in obj["records"]:
        sd_value = None
        if row.get("total_distance") is None and row.get("sd") is not None:
            sd_value = Fraction(str(row["sd"]))
        records.append(RunRecord(
            row["method"], row["k"], row["seed"], row["n"], row["total_distance"],
            row["iterations"], row["converged"], row["init_time"], row["total_time"],
            row.get("error"), sd_value))
    return BenchmarkReport(records)
