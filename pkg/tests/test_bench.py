import json
from fractions import Fraction

import numpy as np
import pytest

from bkmodes.bench import (BenchmarkReport, RunRecord, RunSpec, UsageError, emit_report,
                           format_sd, load_model, load_report, matrix_specs, run_matrix, run_once)
from bkmodes.dataset import CategoricalDataset, ContractError
from bkmodes.ingest import synth_generate
from bkmodes.metric import sd_total


@pytest.fixture(scope="module")
def small():
    return synth_generate(4, 400, 12, 4, 0.15, seed=5).dataset


def test_bkmodes_k1(small):
    rec, model = run_once(small, "bkmodes", 1)
    mode = np.array([np.bincount(small.codes[:, i]).argmax() for i in range(small.m)])
    expect = Fraction(int(np.count_nonzero(small.codes != mode)), small.n)
    assert rec.sd == expect and rec.iterations == 1
    assert rec.total_time >= rec.init_time >= 0


def test_random_repeatable(small):
    a, _ = run_once(small, "random", 4, seed=3)
    b, _ = run_once(small, "random", 4, seed=3)
    assert a.key() == b.key()


def test_init_failure_is_recorded():
    ds = CategoricalDataset.from_rows([[0, 0]] * 5)
    rec, model = run_once(ds, "bkmodes", 2)
    assert model is None and rec.failed and "cannot produce K" in rec.error


def test_matrix_count_and_order(small):
    specs = matrix_specs(["random", "cao", "bkmodes"], [4, 8], [1, 2, 3, 4, 5])
    report = run_matrix(small, specs)
    assert len(report) == 14
    assert [(r.method, r.k, r.seed) for r in report.records][:6] == [
        ("random", 4, 1), ("random", 4, 2), ("random", 4, 3), ("random", 4, 4),
        ("random", 4, 5), ("random", 8, 1)]
    assert [(r.method, r.k) for r in report.records][10:] == [
        ("cao", 4), ("cao", 8), ("bkmodes", 4), ("bkmodes", 8)]


def test_matrix_empty(small):
    report = run_matrix(small, [])
    assert len(report) == 0 and not report.any_failed
    assert emit_report(report).decode().splitlines() == [
        "method,k,seed,n,total_distance,sd,iterations,converged,init_time,total_time,error"]


def test_matrix_parallel_matches_serial(small):
    specs = matrix_specs(["random", "bkmodes"], [3, 5], [1, 2])
    serial = run_matrix(small, specs)
    parallel = run_matrix(small, specs, parallel_runs=3)
    assert [r.key() for r in serial.records] == [r.key() for r in parallel.records]


def test_runspec_validation():
    with pytest.raises(ContractError):
        RunSpec("random", 3)
    with pytest.raises(ContractError):
        RunSpec("kmeans", 3)
    with pytest.raises(ContractError):
        RunSpec("cao", 0)


def _rec(sd_num=49, n=60):
    return RunRecord("cao", 3, None, n, sd_num, 4, True, 0.5, 1.25)


def test_sd_rounding():
    assert format_sd(Fraction(49, 60)) == "0.82"
    assert format_sd(Fraction(1, 200)) == "0.01"
    assert format_sd(Fraction(0)) == "0.00"


def test_emit_csv_one_record():
    lines = emit_report(BenchmarkReport([_rec()]), "csv").decode().splitlines()
    assert len(lines) == 2
    assert lines[1] == "cao,3,,60,49,0.82,4,true,0.5000,1.2500,"


def test_emit_unknown_format():
    with pytest.raises(UsageError):
        emit_report(BenchmarkReport([]), "xml")


def test_emit_plot_projection():
    report = BenchmarkReport([_rec(), RunRecord("random", 3, 7, 60, 30, 2, True, 0.1, 0.2)])
    plot = json.loads(emit_report(report, "plot"))
    assert plot["series"]["cao"] == {"k": [3], "sd": [0.82], "time": [1.25]}
    assert plot["series"]["random[7]"]["sd"] == [0.5]


def test_aggregate_mean_and_min(small):
    report = run_matrix(small, matrix_specs(["random"], [4], [1, 2, 3]))
    sds = [r.sd for r in report.records]
    mean_line = emit_report(report, "csv", "mean").decode().splitlines()[1]
    assert mean_line.split(",")[5] == format_sd(sum(sds, Fraction(0)) / 3)
    min_line = emit_report(report, "csv", "min").decode().splitlines()[1]
    assert min_line.split(",")[5] == format_sd(min(sds))


def test_json_report_round_trip(small, tmp_path):
    report = run_matrix(small, matrix_specs(["cao", "random"], [3], [1, 2]))
    path = tmp_path / "r.json"
    path.write_bytes(emit_report(report, "json"))
    again = load_report(path)
    assert emit_report(again, "csv") == emit_report(report, "csv")


def test_dumped_model_reproduces_sd(small, tmp_path):
    report = run_matrix(small, matrix_specs(["bkmodes", "random"], [4], [2]), dump_dir=tmp_path)
    for rec in report.records:
        name = f"{rec.method}-k4" + (f"-s{rec.seed}" if rec.seed is not None else "") + ".json"
        model = load_model(tmp_path / name)
        assert sd_total(small, model) == rec.sd
