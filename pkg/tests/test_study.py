import asyncio
import csv
import json
import threading
import time

import pytest

import study
from analysis.metrics import StateMetrics
from core.errors import QuadratureError
from study import IlluminationStudy


@pytest.fixture
def mini_presets(tmp_path):
    path = tmp_path / "presets.json"
    path.write_text(json.dumps({
        "presets": [
            {"name": "product", "label": "S-I", "configuration": "1S1I", "family": "separable",
             "reference": {"mean_hb": 0.225347, "mean_holevo": 0.0365761}},
            {"name": "bell", "label": "SI", "configuration": "1S1I", "family": "pair", "pair": [0, 1],
             "reference": {"mean_hb": 0.201891, "mean_holevo": 0.0712934}},
        ],
        "suites": {"mini": ["product", "bell"]},
    }), encoding="utf-8")
    return str(path)


def test_study_runs_suite(mini_presets, tmp_path, capsys):
    runner = IlluminationStudy(tol=1e-4, threads=1, presets_path=mini_presets, run_config={"command": "table"})
    report = asyncio.run(runner.run("mini"))
    assert [r["state"] for r in report.rows] == ["S-I", "SI"]
    assert report.failures == []
    assert report.ranking["1S1I"]["inversions"] == []
    for row in report.rows:
        assert row["mean_hb"] == pytest.approx(row["reference_hb"], abs=1e-3)
        assert row["mean_holevo"] == pytest.approx(row["reference_holevo"], abs=1e-3)

    runner.print_report()
    out = capsys.readouterr().out
    assert "1S1I" in out
    assert "HB/Holevo inversions: 0" in out

    path = runner.save_report(tmp_path / "mini.csv", "csv")
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    meta = json.loads((tmp_path / "mini.csv.meta.json").read_text(encoding="utf-8"))
    assert meta["run_config"] == {"command": "table"}
    assert meta["suite"] == "mini"


def test_study_reports_numeric_failures(mini_presets, monkeypatch, capsys):
    def failing(entry, *args):
        raise QuadratureError("Depth cap reached before tolerance", 0.2, 1e-3, 10)

    monkeypatch.setattr(study, "evaluate_state", failing)
    runner = IlluminationStudy(tol=1e-4, threads=1, presets_path=mini_presets)
    report = asyncio.run(runner.run("mini"))
    assert report.rows == []
    assert report.failures == ["1S1I S-I", "1S1I SI"]
    assert "Error evaluating" in capsys.readouterr().out


def test_save_without_run(mini_presets, capsys):
    runner = IlluminationStudy(presets_path=mini_presets)
    assert runner.save_report() is None
    assert "Run the study first" in capsys.readouterr().out


@pytest.mark.parametrize("threads, per_state, concurrent", [(1, 1, 1), (4, 2, 2), (8, 4, 2)])
def test_study_stays_within_thread_budget(mini_presets, monkeypatch, threads, per_state, concurrent):
    lock = threading.Lock()
    active = {"now": 0, "peak": 0}
    seen = []

    def recording(entry, tol, log_base, with_holevo, workers):
        with lock:
            active["now"] += 1
            active["peak"] = max(active["peak"], active["now"])
            seen.append(workers)
        time.sleep(0.05)
        with lock:
            active["now"] -= 1
        return StateMetrics(entry.configuration, entry.label, entry.d, 0.2, None, 1e-6, 1, 0.0)

    monkeypatch.setattr(study, "evaluate_state", recording)
    runner = IlluminationStudy(tol=1e-4, threads=threads, presets_path=mini_presets)
    asyncio.run(runner.run("mini"))
    assert seen == [per_state, per_state]
    assert active["peak"] <= concurrent
    assert active["peak"] * per_state <= threads
