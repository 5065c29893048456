"""Benchmark harness: tasksets, ground-truth oracle, scoring, process rubric.

End results are scored by level agreement (S_avg); the process side scores
a session log on six dimensions with a deterministic heuristic judge. Both
sides reuse the exact metric and threshold machinery, so an agent that runs
all five scenario metrics and takes the max level reproduces the oracle.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import (
    AllMetricsFailedError,
    BiasAuditError,
    EmptyRecordsError,
    MalformedLogError,
    SchemaError,
)
from .metrics import (
    SCENARIO_METRICS,
    BiasType,
    MetricOptions,
    Scenario,
    classify_scenario,
    run_metric,
)
from .orchestrator import (
    DETECTION_TOOLS,
    STAGE_ORDER,
    SessionLog,
    Stage,
    TaskContext,
    ToolRegistry,
    run_session,
)
from .severity import DEFAULT_TABLE, ThresholdTable, map_to_level
from .tabular import CleaningPolicy, clean_missing, extract_columns, load_table

# Task bias types as they appear in taskset files. "implication" leaves the
# distribution/correlation split to the feature count.
_BIAS_TYPE_IN = {
    "distribution": BiasType.DISTRIBUTION,
    "correlation": BiasType.CORRELATION,
    "implication": BiasType.UNSTATED,
}
_BIAS_TYPE_OUT = {v: k.capitalize() for k, v in _BIAS_TYPE_IN.items()}
TYPE_ROWS = ("Distribution", "Correlation", "Implication")


@dataclass(frozen=True)
class TaskSpec:
    id: str
    dataset: str
    question: str
    bias_type: BiasType
    features: tuple
    significance: str = ""

    def __post_init__(self):
        n = len(self.features)
        if self.bias_type is BiasType.DISTRIBUTION and n != 1:
            raise SchemaError(f"task {self.id}: distribution tasks take "
                              f"exactly 1 feature, got {n}")
        if self.bias_type is BiasType.CORRELATION and n != 2:
            raise SchemaError(f"task {self.id}: correlation tasks take "
                              f"exactly 2 features, got {n}")
        if self.bias_type is BiasType.UNSTATED and n not in (1, 2):
            raise SchemaError(f"task {self.id}: implication tasks take "
                              f"1 or 2 features, got {n}")

    @property
    def type_label(self) -> str:
        return _BIAS_TYPE_OUT[self.bias_type]

    def to_record(self) -> dict:
        return {"id": self.id, "dataset": self.dataset,
                "question": self.question,
                "bias_type": self.type_label.lower(),
                "features": list(self.features),
                "significance": self.significance}


def load_taskset(path) -> list:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return []
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"taskset {path}: {exc}") from exc
    if not isinstance(records, list):
        raise SchemaError(f"taskset {path}: expected a list of tasks")
    base = os.path.dirname(os.path.abspath(path))
    tasks = []
    for i, rec in enumerate(records):
        try:
            bias_type = _BIAS_TYPE_IN[str(rec["bias_type"]).lower()]
            dataset = str(rec["dataset"])
            if not os.path.isabs(dataset):
                dataset = os.path.join(base, dataset)
            tasks.append(TaskSpec(
                id=str(rec["id"]), dataset=dataset,
                question=str(rec["question"]), bias_type=bias_type,
                features=tuple(rec["features"]),
                significance=str(rec.get("significance", ""))))
        except KeyError as exc:
            raise SchemaError(f"taskset entry {i}: missing field {exc}") from exc
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise SchemaError(f"taskset {path}: duplicate task ids")
    return tasks


@dataclass(frozen=True)
class GroundTruth:
    oracle_levels: dict  # metric_id -> level (1-5)
    y: int               # max of the oracle levels
    errors: tuple = ()


def ground_truth(task: TaskSpec, thresholds: ThresholdTable = DEFAULT_TABLE,
                 opts: MetricOptions = MetricOptions()) -> GroundTruth:
    """Oracle reference: run all five scenario metrics, take the max level."""
    table = load_table(task.dataset)
    subset = extract_columns(table, task.features)
    cleaned = clean_missing(subset, subset.column_names, CleaningPolicy()).table
    cols = [cleaned.column(n) for n in task.features]
    scenario = classify_scenario(cols, task.bias_type)
    levels = {}
    errors = []
    for metric_id in SCENARIO_METRICS[scenario]:
        try:
            result = run_metric(metric_id, cols, opts)
            levels[metric_id] = map_to_level(metric_id, result, thresholds).value
        except BiasAuditError as exc:
            errors.append(f"{metric_id}: {exc}")
    if not levels:
        raise AllMetricsFailedError(
            f"task {task.id}: every scenario metric failed: {errors}")
    return GroundTruth(oracle_levels=levels, y=max(levels.values()),
                       errors=tuple(errors))


@dataclass(frozen=True)
class EndResultRecord:
    task_id: str
    predicted: int      # agent headline level x, 1-5
    truth: int          # oracle level y, 1-5
    oracle_levels: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {"task_id": self.task_id, "predicted": self.predicted,
                "truth": self.truth, "oracle_levels": self.oracle_levels}


def score_end_results(records) -> dict:
    """Level-agreement scores: S_avg percent and mean absolute error."""
    records = list(records)
    if not records:
        raise EmptyRecordsError("no end results to score")
    n = len(records)
    mae = sum(abs(r.predicted - r.truth) for r in records) / n
    s_avg = sum(1.0 - abs(r.predicted - r.truth) / 4.0 for r in records) / n * 100.0
    return {"s_avg": s_avg, "mae": mae, "n": n}


# --------------------------------------------------------------------------
# Process evaluation
# --------------------------------------------------------------------------

DIMENSIONS = ("Communication", "Planning", "Tooling", "Adaptivity",
              "Summarization", "Integration")

RATING_BANDS = ((90, "Excellent"), (75, "Proficient"), (60, "Adequate"),
                (40, "Mediocre"))


def rating_label(score: float) -> str:
    for cut, label in RATING_BANDS:
        if score >= cut:
            return label
    return "Unsatisfactory"


@dataclass(frozen=True)
class ProcessScores:
    scores: dict    # dimension -> score 0-100
    evidence: dict  # dimension -> text

    def __post_init__(self):
        for dim in DIMENSIONS:
            if dim not in self.scores:
                raise ValueError(f"missing dimension {dim}")
            if not 0 <= self.scores[dim] <= 100:
                raise ValueError(f"{dim} score out of range")

    def label(self, dim: str) -> str:
        return rating_label(self.scores[dim])

    def to_record(self) -> dict:
        return {dim: {"score": self.scores[dim], "label": self.label(dim),
                      "evidence": self.evidence.get(dim, "")}
                for dim in DIMENSIONS}

    def to_markdown(self) -> str:
        lines = ["# Process evaluation", "",
                 "| dimension | score | rating | evidence |",
                 "|---|---|---|---|"]
        for dim in DIMENSIONS:
            lines.append(f"| {dim} | {self.scores[dim]:.0f} | "
                         f"{self.label(dim)} | {self.evidence.get(dim, '')} |")
        return "\n".join(lines) + "\n"


class HeuristicJudge:
    """Deterministic process scoring computed purely from log structure."""

    def score(self, log: SessionLog) -> ProcessScores:
        events = log.events
        if not events:
            raise MalformedLogError("empty session log")
        seqs = [e.seq for e in events]
        if seqs != list(range(len(events))):
            raise MalformedLogError("event sequence numbers are not contiguous")

        tool_events = [e for e in events if e.actor == "tool"]
        tool_names = [e.payload.get("tool") for e in tool_events]
        tool_failures = [e for e in tool_events if not e.payload.get("ok")]
        detection_invoked = {DETECTION_TOOLS[t] for t in tool_names
                             if t in DETECTION_TOOLS}
        critiques = [e for e in events if e.actor == "advisor"]
        user_events = [e for e in events
                       if e.actor == "user" and e.action in ("task", "message")]
        finish = next((e for e in events if e.action == "finish"), None)
        finished_complete = bool(finish and finish.payload.get("complete"))
        exhausted = any(e.action == "budget_exhausted" for e in events)
        planner_errors = sum(1 for e in events if e.action == "planner_error")

        scores = {}
        evidence = {}

        scores["Communication"] = (30 + (30 if user_events else 0)
                                   + (20 if finished_complete else 0)
                                   + (20 if critiques else 0))
        evidence["Communication"] = (
            f"{len(user_events)} user turn(s), {len(critiques)} advisor "
            f"consultation(s), "
            f"{'complete' if finished_complete else 'no complete'} wrap-up")

        if detection_invoked:
            scenario = self._scenario_of(detection_invoked)
            required = set(SCENARIO_METRICS[scenario]) if scenario else set()
            coverage = (len(detection_invoked & required) / len(required)
                        if required else 0.0)
            scores["Planning"] = round(30 + 70 * coverage)
            evidence["Planning"] = (
                f"{len(detection_invoked & required)}/{len(required) or 5} "
                f"scenario metrics scheduled")
        else:
            scores["Planning"] = 20
            evidence["Planning"] = "no detection metrics scheduled"

        if not tool_events:
            scores["Tooling"] = 20
            evidence["Tooling"] = "no tool invocations in the log"
        else:
            error_rate = len(tool_failures) / len(tool_events)
            scores["Tooling"] = round(max(40, 100 - 60 * error_rate))
            evidence["Tooling"] = (
                f"{len(tool_events)} invocation(s), "
                f"{len(tool_failures)} failure(s)")

        if not tool_failures:
            scores["Adaptivity"] = 85
            evidence["Adaptivity"] = "no tool errors; no recovery needed"
        elif finished_complete:
            scores["Adaptivity"] = 75
            evidence["Adaptivity"] = (
                f"recovered from {len(tool_failures)} tool failure(s) and "
                f"still completed")
        else:
            scores["Adaptivity"] = 30
            evidence["Adaptivity"] = "tool failures without recovery to completion"

        report_events = [e for e in tool_events
                         if e.payload.get("tool") == "generate_bias_report"
                         and e.payload.get("ok")]
        charts = [t for t in tool_names if t and t.startswith("plot_")]
        if report_events and charts:
            scores["Summarization"] = 100
            evidence["Summarization"] = "report assembled with charts"
        elif report_events:
            scores["Summarization"] = 70
            evidence["Summarization"] = "report assembled without charts"
        else:
            scores["Summarization"] = 20
            evidence["Summarization"] = "no report generated"

        integration = 100
        notes = []
        order = [s.value for s in STAGE_ORDER]
        for e in events:
            if e.action == "stage":
                src, dst = e.payload.get("from"), e.payload.get("to")
                if (src in order and dst in order
                        and order.index(dst) > order.index(src) + 1):
                    integration -= 30
                    notes.append(f"skipped stage {src}->{dst}")
        integration -= 20 * planner_errors
        if planner_errors:
            notes.append(f"{planner_errors} planner error(s)")
        if exhausted:
            integration = min(integration, 40)
            notes.append("budget exhausted")
        elif not finish:
            integration = min(integration, 30)
            notes.append("no finish event")
        scores["Integration"] = max(0, integration)
        evidence["Integration"] = "; ".join(notes) or "legal stage flow, finished"

        return ProcessScores(scores=scores, evidence=evidence)

    @staticmethod
    def _scenario_of(metric_ids):
        for scenario, ids in SCENARIO_METRICS.items():
            if metric_ids & set(ids):
                return scenario
        return None


class ChatJudge:
    """Optional judge that delegates rubric scoring to a chat endpoint."""

    _FRAME = (
        "Score the following bias-audit session log on six dimensions "
        "(Communication, Planning, Tooling, Adaptivity, Summarization, "
        "Integration), each 0-100. Reply with a JSON object mapping "
        "dimension to score."
    )

    def __init__(self, config, transport=None):
        self.config = config
        self.transport = transport

    def score(self, log: SessionLog) -> ProcessScores:
        from .orchestrator import chat_complete
        messages = [{"role": "system", "content": self._FRAME},
                    {"role": "user", "content": log.to_jsonl()}]
        reply = chat_complete(messages, [], self.config, transport=self.transport)
        try:
            content = reply["choices"][0]["message"]["content"]
            raw = json.loads(content)
            scores = {dim: float(raw[dim]) for dim in DIMENSIONS}
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise MalformedLogError(f"judge reply unusable: {exc}") from exc
        return ProcessScores(scores=scores,
                             evidence={dim: "chat judge" for dim in DIMENSIONS})


def score_process(log: SessionLog, judge=None):
    """Score one session log; returns (ProcessScores, markdown report)."""
    judge = judge or HeuristicJudge()
    scores = judge.score(log)
    return scores, scores.to_markdown()


# --------------------------------------------------------------------------
# Benchmark runner
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkReport:
    rows: dict       # type label -> {"n", "s_avg", "mae"}
    overall: dict    # {"n", "s_avg", "mae"}
    records: tuple   # EndResultRecord per scored task
    failures: tuple  # (task_id, error text)

    def to_markdown(self) -> str:
        lines = ["# Benchmark results", "",
                 "| task type | n | S_avg (%) | MAE |",
                 "|---|---|---|---|"]
        for label in TYPE_ROWS:
            row = self.rows.get(label)
            if row is None:
                lines.append(f"| {label} | 0 | - | - |")
            else:
                lines.append(f"| {label} | {row['n']} | {row['s_avg']:.2f} "
                             f"| {row['mae']:.3f} |")
        lines.append(f"| Overall | {self.overall['n']} "
                     f"| {self.overall['s_avg']:.2f} "
                     f"| {self.overall['mae']:.3f} |")
        if self.failures:
            lines += ["", "## Failures", ""]
            lines += [f"- {task_id}: {error}" for task_id, error in self.failures]
        return "\n".join(lines) + "\n"

    def to_record(self) -> dict:
        return {"rows": self.rows, "overall": self.overall,
                "records": [r.to_record() for r in self.records],
                "failures": [list(f) for f in self.failures]}


def _run_one(task: TaskSpec, planner_factory, registry, thresholds, opts,
             out_dir):
    context = TaskContext(question=task.question, dataset=task.dataset,
                          features=task.features, bias_type=task.bias_type,
                          task_id=task.id)
    task_dir = None
    if out_dir is not None:
        task_dir = os.path.join(out_dir, task.id)
        os.makedirs(task_dir, exist_ok=True)
    report, log = run_session(context, planner_factory(), registry,
                              thresholds=thresholds, opts=opts,
                              out_dir=task_dir)
    if out_dir is not None:
        with open(os.path.join(out_dir, f"{task.id}.log.jsonl"), "w",
                  encoding="utf-8") as fh:
            fh.write(log.to_jsonl())
    if not report.complete or not report.findings:
        raise BiasAuditError("session produced no complete report")
    truth = ground_truth(task, thresholds, opts)
    return EndResultRecord(task_id=task.id,
                           predicted=report.headline.value,
                           truth=truth.y,
                           oracle_levels=truth.oracle_levels)


def run_benchmark(taskset, planner_factory, registry: ToolRegistry,
                  thresholds: ThresholdTable = DEFAULT_TABLE,
                  opts: MetricOptions = MetricOptions(), out_dir=None,
                  jobs: int = 1) -> BenchmarkReport:
    """Run every task through a session and score against the oracle.

    ``planner_factory`` is called once per task so planners may hold
    per-session state. Per-task failures are reported, not raised.
    """
    tasks = list(taskset)
    if not tasks:
        raise EmptyRecordsError("empty taskset")
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    def attempt(task):
        try:
            return task, _run_one(task, planner_factory, registry, thresholds,
                                  opts, out_dir), None
        except BiasAuditError as exc:
            return task, None, f"{type(exc).__name__}: {exc}"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(attempt, tasks))
    else:
        outcomes = [attempt(t) for t in tasks]

    records = []
    failures = []
    by_type = {}
    for task, record, error in outcomes:
        if record is None:
            failures.append((task.id, error))
            continue
        records.append(record)
        by_type.setdefault(task.type_label, []).append(record)
    if not records:
        raise EmptyRecordsError("every task failed; nothing to score")

    rows = {label: score_end_results(recs) for label, recs in by_type.items()}
    overall = score_end_results(records)
    report = BenchmarkReport(rows=rows, overall=overall,
                             records=tuple(records), failures=tuple(failures))
    if out_dir is not None:
        with open(os.path.join(out_dir, "benchmark.md"), "w",
                  encoding="utf-8") as fh:
            fh.write(report.to_markdown())
        with open(os.path.join(out_dir, "results.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(report.to_record(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report
