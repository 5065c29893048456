"""Benchmark harness: tasksets, oracle, level scoring, process rubric."""

import json
import os
from importlib import resources

import pytest

from biasaudit.bench import (
    DIMENSIONS,
    BenchmarkReport,
    EndResultRecord,
    HeuristicJudge,
    ProcessScores,
    TaskSpec,
    ground_truth,
    load_taskset,
    rating_label,
    run_benchmark,
    score_end_results,
    score_process,
)
from biasaudit.errors import EmptyRecordsError, MalformedLogError, SchemaError
from biasaudit.metrics import BiasType, Scenario
from biasaudit.orchestrator import RulePlanner, SessionLog, build_registry, run_session, TaskContext
from biasaudit.synthgen import SynthSpec, generate
from biasaudit.tabular import save_table


@pytest.fixture(scope="module")
def registry():
    return build_registry()


def task(task_id="T-1", dataset="d.csv", bias_type=BiasType.DISTRIBUTION,
         features=("a",)):
    return TaskSpec(id=task_id, dataset=dataset, question="q",
                    bias_type=bias_type, features=features)


class TestTaskSpec:
    def test_distribution_needs_one_feature(self):
        with pytest.raises(SchemaError):
            task(bias_type=BiasType.DISTRIBUTION, features=("a", "b"))

    def test_correlation_needs_two_features(self):
        with pytest.raises(SchemaError):
            task(bias_type=BiasType.CORRELATION, features=("a",))

    def test_implication_allows_one_or_two(self):
        task(bias_type=BiasType.UNSTATED, features=("a",))
        task(bias_type=BiasType.UNSTATED, features=("a", "b"))
        with pytest.raises(SchemaError):
            task(bias_type=BiasType.UNSTATED, features=("a", "b", "c"))

    def test_type_labels(self):
        assert task(bias_type=BiasType.UNSTATED).type_label == "Implication"
        assert task().type_label == "Distribution"


class TestLoadTaskset:
    def test_bundled_sample_taskset(self):
        path = resources.files("biasaudit.data").joinpath("sample_taskset.json")
        tasks = load_taskset(str(path))
        assert len(tasks) == 15
        labels = [t.type_label for t in tasks]
        assert labels.count("Distribution") == 6
        assert labels.count("Correlation") == 6
        assert labels.count("Implication") == 3
        for t in tasks:
            assert os.path.isabs(t.dataset) and os.path.exists(t.dataset)

    def test_empty_file_is_empty_taskset(self, tmp_path):
        path = tmp_path / "tasks.json"
        path.write_text("", encoding="utf-8")
        assert load_taskset(path) == []

    def test_duplicate_ids_rejected(self, tmp_path):
        rec = {"id": "T-1", "dataset": "d.csv", "question": "q",
               "bias_type": "distribution", "features": ["a"]}
        path = tmp_path / "tasks.json"
        path.write_text(json.dumps([rec, rec]), encoding="utf-8")
        with pytest.raises(SchemaError):
            load_taskset(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "tasks.json"
        path.write_text(json.dumps([{"id": "T-1"}]), encoding="utf-8")
        with pytest.raises(SchemaError):
            load_taskset(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "tasks.json"
        path.write_text("not json", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_taskset(path)


def synth_csv(tmp_path, scenario, strength, name, n=2000, seed=7):
    table = generate(SynthSpec(scenario, n=n, strength=strength, seed=seed))
    path = tmp_path / name
    save_table(table, path)
    return str(path)


class TestGroundTruth:
    def test_uniform_distribution_is_level_one(self, tmp_path):
        path = synth_csv(tmp_path, Scenario.CAT_DIST, 0.0, "u.csv")
        truth = ground_truth(task(dataset=path, features=("category",)))
        assert truth.y == 1

    def test_strong_group_gap_is_level_five(self, tmp_path):
        path = synth_csv(tmp_path, Scenario.CAT_NUM, 0.95, "g.csv")
        truth = ground_truth(task(dataset=path,
                                  bias_type=BiasType.CORRELATION,
                                  features=("group", "value")))
        assert truth.y == 5

    def test_max_rule(self, tmp_path):
        path = synth_csv(tmp_path, Scenario.NUM_NUM, 0.45, "c.csv")
        truth = ground_truth(task(dataset=path,
                                  bias_type=BiasType.CORRELATION,
                                  features=("x", "y")))
        assert truth.y == max(truth.oracle_levels.values())
        assert truth.oracle_levels


class TestScoreEndResults:
    def rec(self, predicted, truth, task_id="T"):
        return EndResultRecord(task_id=task_id, predicted=predicted,
                               truth=truth)

    def test_perfect_agreement(self):
        out = score_end_results([self.rec(3, 3), self.rec(5, 5)])
        assert out["s_avg"] == 100.0 and out["mae"] == 0.0 and out["n"] == 2

    def test_partial_agreement(self):
        out = score_end_results([self.rec(3, 3), self.rec(2, 4)])
        assert out["s_avg"] == pytest.approx(75.0)
        assert out["mae"] == pytest.approx(1.0)

    def test_maximal_disagreement(self):
        out = score_end_results([self.rec(1, 5)])
        assert out["s_avg"] == 0.0 and out["mae"] == 4.0

    def test_empty_records_rejected(self):
        with pytest.raises(EmptyRecordsError):
            score_end_results([])


class TestRatingBands:
    def test_band_edges(self):
        assert rating_label(95) == "Excellent"
        assert rating_label(90) == "Excellent"
        assert rating_label(75) == "Proficient"
        assert rating_label(60) == "Adequate"
        assert rating_label(40) == "Mediocre"
        assert rating_label(39) == "Unsatisfactory"


def clean_log(registry, tmp_path):
    path = tmp_path / "cat.csv"
    rows = ["group"] + ["a"] * 30 + ["b"] * 10 + ["c"] * 5
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    context = TaskContext(question="Is group balanced?", dataset=str(path),
                          features=("group",),
                          bias_type=BiasType.DISTRIBUTION)
    _, log = run_session(context, RulePlanner(), registry)
    return log


class TestHeuristicJudge:
    def test_clean_session_scores_high(self, registry, tmp_path):
        scores = HeuristicJudge().score(clean_log(registry, tmp_path))
        for dim in DIMENSIONS:
            assert scores.scores[dim] >= 75, dim

    def test_no_tool_log_caps_tooling(self):
        log = SessionLog.from_jsonl(
            '{"seq": 0, "stage": "user_input", "actor": "user", '
            '"action": "task", "payload": {}, "wall_ms": 0}\n'
            '{"seq": 1, "stage": "user_input", "actor": "primary", '
            '"action": "finish", "payload": {"complete": false}, "wall_ms": 0}\n')
        scores = HeuristicJudge().score(log)
        assert scores.scores["Tooling"] <= 40

    def test_empty_log_rejected(self):
        with pytest.raises(MalformedLogError):
            HeuristicJudge().score(SessionLog())

    def test_non_contiguous_seq_rejected(self):
        log = SessionLog.from_jsonl(
            '{"seq": 0, "stage": "user_input", "actor": "user", '
            '"action": "task", "payload": {}, "wall_ms": 0}\n'
            '{"seq": 5, "stage": "user_input", "actor": "primary", '
            '"action": "finish", "payload": {}, "wall_ms": 0}\n')
        with pytest.raises(MalformedLogError):
            HeuristicJudge().score(log)

    def test_deterministic(self, registry, tmp_path):
        log = clean_log(registry, tmp_path)
        a = HeuristicJudge().score(log)
        b = HeuristicJudge().score(log)
        assert a.scores == b.scores and a.evidence == b.evidence

    def test_score_process_markdown(self, registry, tmp_path):
        scores, markdown = score_process(clean_log(registry, tmp_path))
        assert isinstance(scores, ProcessScores)
        for dim in DIMENSIONS:
            assert dim in markdown


class TestProcessScores:
    def test_missing_dimension_rejected(self):
        scores = {dim: 80 for dim in DIMENSIONS[:-1]}
        with pytest.raises(ValueError):
            ProcessScores(scores=scores, evidence={})

    def test_out_of_range_rejected(self):
        scores = {dim: 80 for dim in DIMENSIONS}
        scores["Tooling"] = 120
        with pytest.raises(ValueError):
            ProcessScores(scores=scores, evidence={})


def small_taskset(tmp_path):
    cat = synth_csv(tmp_path, Scenario.CAT_DIST, 0.7, "cat.csv")
    num_num = synth_csv(tmp_path, Scenario.NUM_NUM, 0.7, "nn.csv")
    cat_num = synth_csv(tmp_path, Scenario.CAT_NUM, 0.7, "cn.csv")
    return [
        task("T-d", dataset=cat, features=("category",)),
        task("T-c", dataset=num_num, bias_type=BiasType.CORRELATION,
             features=("x", "y")),
        task("T-i", dataset=cat_num, bias_type=BiasType.UNSTATED,
             features=("group", "value")),
    ]


class TestRunBenchmark:
    def test_rule_planner_matches_oracle(self, registry, tmp_path):
        out = tmp_path / "bench"
        report = run_benchmark(small_taskset(tmp_path), RulePlanner, registry,
                               out_dir=str(out))
        assert report.overall["n"] == 3
        assert report.overall["s_avg"] == 100.0
        assert set(report.rows) == {"Distribution", "Correlation", "Implication"}
        assert (out / "benchmark.md").exists()
        assert (out / "results.json").exists()
        assert (out / "T-d.log.jsonl").exists()
        assert (out / "T-d" / "report.md").exists()
        md = report.to_markdown()
        for label in ("Distribution", "Correlation", "Implication", "Overall"):
            assert f"| {label} |" in md

    def test_parallel_jobs_agree(self, registry, tmp_path):
        tasks = small_taskset(tmp_path)
        serial = run_benchmark(tasks, RulePlanner, registry, jobs=1)
        parallel = run_benchmark(tasks, RulePlanner, registry, jobs=3)
        assert serial.overall == parallel.overall

    def test_empty_taskset_rejected(self, registry):
        with pytest.raises(EmptyRecordsError):
            run_benchmark([], RulePlanner, registry)

    def test_one_failing_task_is_reported(self, registry, tmp_path):
        tasks = small_taskset(tmp_path)
        tasks.append(task("T-bad", dataset=tasks[0].dataset,
                          features=("no_such_column",)))
        report = run_benchmark(tasks, RulePlanner, registry)
        assert report.overall["n"] == 3
        assert len(report.failures) == 1
        assert report.failures[0][0] == "T-bad"
        assert isinstance(report, BenchmarkReport)
