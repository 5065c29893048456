"""Five-stage detect/visualize/report workflow behind a pluggable planner.

One session is a single-threaded event loop: the planner proposes an
action, the loop executes it against the tool registry, and every action,
tool result, critique, and stage transition lands in the session log.
The Primary/Advisor split is a role protocol within the loop, not two
processes; the rule planner and rule advisor are deterministic so offline
runs replay byte-identically (event times default to a normalized zero
clock).
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field, replace
from enum import Enum

from . import methodlib
from .errors import (
    BiasAuditError,
    EndOfInputError,
    MetricError,
    NetworkError,
    PlannerError,
    TableError,
    ToolError,
)
from .metrics import (
    SCENARIO_METRICS,
    BiasType,
    MetricOptions,
    Scenario,
    classify_scenario,
    run_metric,
)
from .reporting import ChartKind, ChartSpec, Finding, assemble_report, render_chart
from .reporting.report import ReportDocument
from .severity import DEFAULT_TABLE, ThresholdTable, map_to_level
from .tabular import (
    AggregateFn,
    CleaningMode,
    CleaningPolicy,
    Kind,
    NormalizeMode,
    clean_missing,
    extract_columns,
    group_and_aggregate,
    list_features,
    load_table,
    normalize_or_standardize,
)


class Stage(str, Enum):
    USER_INPUT = "user_input"
    PREPROCESSING = "preprocessing"
    DETECTION = "detection"
    VISUALIZATION_SUMMARY = "visualization_summary"
    FEEDBACK = "feedback"


STAGE_ORDER = tuple(Stage)


class ActionKind(str, Enum):
    INVOKE_TOOL = "invoke_tool"
    ASK_USER = "ask_user"
    CONSULT_ADVISOR = "consult_advisor"
    TRANSITION = "transition"
    FINISH = "finish"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    tool: str | None = None
    args: dict = field(default_factory=dict)
    prompt: str = ""
    payload: dict = field(default_factory=dict)
    stage: Stage | None = None
    rationale: str = ""

    def to_record(self) -> dict:
        rec = {"kind": self.kind.value, "rationale": self.rationale}
        if self.tool:
            rec["tool"] = self.tool
            rec["args"] = self.args
        if self.prompt:
            rec["prompt"] = self.prompt
        if self.payload:
            rec["payload"] = self.payload
        if self.stage:
            rec["stage"] = self.stage.value
        return rec


class Verdict(str, Enum):
    APPROVE = "approve"
    REVISE = "revise"


@dataclass(frozen=True)
class Critique:
    verdict: Verdict
    issues: tuple = ()
    suggested_actions: tuple = ()

    def __post_init__(self):
        if self.verdict is Verdict.REVISE and not self.issues:
            raise ValueError("a Revise critique must name at least one issue")

    def to_record(self) -> dict:
        return {"verdict": self.verdict.value, "issues": list(self.issues),
                "suggested": [a.to_record() for a in self.suggested_actions]}


@dataclass(frozen=True)
class TaskContext:
    question: str
    dataset: str
    features: tuple
    bias_type: BiasType = BiasType.UNSTATED
    followups: tuple = ()
    interactive: bool = False
    task_id: str = "adhoc"


@dataclass
class LogEvent:
    seq: int
    stage: str
    actor: str
    action: str
    payload: dict
    wall_ms: int

    def to_record(self) -> dict:
        return {"seq": self.seq, "stage": self.stage, "actor": self.actor,
                "action": self.action, "payload": self.payload,
                "wall_ms": self.wall_ms}


@dataclass
class SessionLog:
    events: list = field(default_factory=list)

    def append(self, stage: Stage, actor: str, action: str, payload: dict,
               wall_ms: int) -> None:
        self.events.append(LogEvent(len(self.events), stage.value, actor,
                                    action, _jsonable(payload), wall_ms))

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_record(), sort_keys=True) + "\n"
                       for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionLog":
        from .errors import MalformedLogError
        events = []
        for lineno, line in enumerate(text.splitlines()):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                events.append(LogEvent(rec["seq"], rec["stage"], rec["actor"],
                                       rec["action"], rec["payload"],
                                       rec["wall_ms"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise MalformedLogError(f"log line {lineno}: {exc}") from exc
        return cls(events=events)


def _jsonable(obj):
    try:
        json.dumps(obj)
        return obj
    except (TypeError, ValueError):
        return json.loads(json.dumps(obj, default=str))


# --------------------------------------------------------------------------
# Tool registry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ToolEntry:
    name: str
    signature: str
    description: str
    executor: object  # callable(SessionState, **args) -> json payload


@dataclass(frozen=True)
class ToolRegistry:
    entries: dict

    def __contains__(self, name):
        return name in self.entries

    def get(self, name) -> ToolEntry:
        return self.entries[name]

    def names(self):
        return sorted(self.entries)

    def descriptions(self) -> list:
        return [{"name": e.name, "signature": e.signature,
                 "description": e.description}
                for _, e in sorted(self.entries.items())]


# Long scenario-prefixed tool name -> metric id.
DETECTION_TOOLS = {}
for _scenario, _prefix in ((Scenario.CAT_DIST, "categorical_distribution"),
                           (Scenario.NUM_DIST, "numerical_distribution"),
                           (Scenario.CAT_CAT, "categorical_categorical_correlation"),
                           (Scenario.CAT_NUM, "categorical_numerical_correlation"),
                           (Scenario.NUM_NUM, "numerical_numerical_correlation")):
    for _mid in SCENARIO_METRICS[_scenario]:
        DETECTION_TOOLS[f"{_prefix}_{_mid}"] = _mid

METRIC_TO_TOOL = {m: t for t, m in DETECTION_TOOLS.items()}

CHART_TOOLS = {
    "plot_bar_chart": ChartKind.BAR,
    "plot_pie_chart": ChartKind.PIE,
    "plot_horizontal_bar_chart": ChartKind.HORIZONTAL_BAR,
    "plot_treemap": ChartKind.TREEMAP,
    "plot_heatmap": ChartKind.HEATMAP,
    "plot_correlation_heatmap": ChartKind.CORRELATION_HEATMAP,
    "plot_stacked_bar_chart": ChartKind.STACKED_BAR,
    "plot_grouped_bar_chart": ChartKind.GROUPED_BAR,
    "plot_box_plot": ChartKind.BOX,
}

# Chart kind the rule planner picks per scenario.
SCENARIO_CHART = {
    Scenario.CAT_DIST: "plot_bar_chart",
    Scenario.NUM_DIST: "plot_box_plot",
    Scenario.CAT_CAT: "plot_stacked_bar_chart",
    Scenario.CAT_NUM: "plot_box_plot",
    Scenario.NUM_NUM: "plot_correlation_heatmap",
}


@dataclass
class SessionState:
    """Mutable per-session workspace shared by the loop and the tools."""
    task: TaskContext
    registry: "ToolRegistry"
    thresholds: ThresholdTable
    opts: MetricOptions
    out_dir: str | None
    library: list
    stage: Stage = Stage.USER_INPUT
    budget: int = 64
    artifacts: dict = field(default_factory=dict)
    findings: list = field(default_factory=list)
    attempted_metrics: list = field(default_factory=list)
    charts: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    recovered_errors: int = 0
    consulted: set = field(default_factory=set)
    followup_index: int = 0
    last_planner_error: str | None = None
    last_failed_call: str | None = None
    log: SessionLog = field(default_factory=SessionLog)

    def working_table(self):
        for key in ("clean", "subset", "table"):
            if key in self.artifacts:
                return self.artifacts[key]
        raise ToolError("no table loaded yet")

    def scenario(self) -> Scenario:
        table = self.working_table()
        cols = [table.column(n) for n in self.task.features]
        stated = {BiasType.DISTRIBUTION: BiasType.DISTRIBUTION,
                  BiasType.CORRELATION: BiasType.CORRELATION}.get(
                      self.task.bias_type, BiasType.UNSTATED)
        return classify_scenario(cols, stated)


def _tool_get_csv_features(state: SessionState, path=None):
    return {"features": list_features(path or state.task.dataset)}


def _tool_load_csv_file(state: SessionState, path=None):
    table = load_table(path or state.task.dataset)
    state.artifacts["table"] = table
    return {"rows": table.row_count,
            "columns": [{"name": c.name, "kind": c.kind.value}
                        for c in table.columns]}


def _extract(state: SessionState, names):
    table = state.artifacts.get("table")
    if table is None:
        raise ToolError("load_csv_file must run before extraction")
    subset = extract_columns(table, names)
    state.artifacts["subset"] = subset
    return {"columns": [{"name": c.name, "kind": c.kind.value}
                        for c in subset.columns],
            "rows": subset.row_count}


def _tool_extract_single_column(state: SessionState, column=None):
    return _extract(state, [column])


def _tool_extract_two_columns(state: SessionState, column_a=None, column_b=None):
    return _extract(state, [column_a, column_b])


def _tool_clean_missing_values(state: SessionState, columns=None, mode="drop_row"):
    table = state.artifacts.get("subset") or state.artifacts.get("table")
    if table is None:
        raise ToolError("nothing to clean: no table loaded")
    policy = CleaningPolicy(mode=CleaningMode(mode))
    result = clean_missing(table, columns or table.column_names, policy)
    state.artifacts["clean"] = result.table
    return {"rows": result.table.row_count,
            "cells_changed": result.cells_changed,
            "rows_dropped": result.rows_dropped}


def _tool_normalize_or_standardize(state: SessionState, column=None, mode="standardize"):
    table = state.working_table()
    out = normalize_or_standardize(table, column, NormalizeMode(mode))
    state.artifacts["clean"] = out
    return {"column": column, "mode": mode}


def _tool_group_and_aggregate(state: SessionState, by=None, target=None, fn="mean"):
    table = state.working_table()
    out = group_and_aggregate(table, by, target, AggregateFn(fn))
    return {"groups": out.row_count,
            "rows": [
                {out.columns[0].name: out.columns[0].values[i],
                 out.columns[1].name: out.columns[1].values[i]}
                for i in range(out.row_count)
            ]}


def _make_detection_executor(metric_id):
    def executor(state: SessionState, **_args):
        table = state.working_table()
        cols = [table.column(n) for n in state.task.features]
        state.attempted_metrics.append(metric_id)
        result = run_metric(metric_id, cols, state.opts)
        level = map_to_level(metric_id, result, state.thresholds)
        state.findings.append(Finding.from_result(result, level))
        record = result.to_record()
        record["level"] = level.value
        record["label"] = level.label
        return record
    return executor


def _chart_data(state: SessionState, kind: ChartKind) -> ChartSpec:
    table = state.working_table()
    cols = [table.column(n) for n in state.task.features]
    title = f"{kind.value}: {', '.join(state.task.features)}"
    if kind in (ChartKind.BAR, ChartKind.PIE, ChartKind.HORIZONTAL_BAR,
                ChartKind.TREEMAP, ChartKind.HEATMAP):
        col = next((c for c in cols if c.kind is Kind.CATEGORICAL), cols[0])
        counts = {}
        for v in col.values:
            if v is not None:
                counts[v] = counts.get(v, 0) + 1
        return ChartSpec(kind, {"series": counts}, title=title)
    if kind in (ChartKind.STACKED_BAR, ChartKind.GROUPED_BAR):
        if len(cols) != 2:
            raise ToolError(f"{kind.value} needs two categorical features")
        groups = {}
        for a, b in zip(cols[0].values, cols[1].values):
            if a is None or b is None:
                continue
            groups.setdefault(str(a), {}).setdefault(str(b), 0)
            groups[str(a)][str(b)] += 1
        return ChartSpec(kind, {"groups": groups}, title=title)
    if kind is ChartKind.BOX:
        cat = next((c for c in cols if c.kind is Kind.CATEGORICAL), None)
        num = next((c for c in cols if c.kind is Kind.NUMERICAL), None)
        if num is None:
            raise ToolError("box plot needs a numerical feature")
        if cat is None:
            groups = {num.name: num.non_missing()}
        else:
            groups = {}
            for g, v in zip(cat.values, num.values):
                if g is None or v is None:
                    continue
                groups.setdefault(str(g), []).append(v)
        return ChartSpec(kind, {"groups": groups}, title=title)
    # correlation heatmap over the numerical features
    nums = [c for c in cols if c.kind is Kind.NUMERICAL]
    if len(nums) < 2:
        raise ToolError("correlation heatmap needs two numerical features")
    from .metrics.num_num import pearson as _pearson
    labels = [c.name for c in nums]
    matrix = [[1.0 if i == j else
               _pearson(nums[i], nums[j], state.opts).raw["r"]
               for j in range(len(nums))] for i in range(len(nums))]
    return ChartSpec(kind, {"labels": labels, "matrix": matrix}, title=title)


def _make_chart_executor(tool_name, kind):
    def executor(state: SessionState, **_args):
        spec = _chart_data(state, kind)
        filename = f"chart_{len(state.charts):02d}_{kind.value}.svg"
        if state.out_dir is not None:
            import os
            path = os.path.join(state.out_dir, filename)
            render_chart(spec, path)
        else:
            state.artifacts.setdefault("chart_markup", {})[filename] = \
                render_chart(spec)
        state.charts.append(filename)
        return {"file": filename, "kind": kind.value}
    return executor


def _tool_get_user_input(state: SessionState, prompt=""):
    message = get_user_input(state)
    return {"message": message}


def _tool_get_all_reference_intentions(state: SessionState):
    return {"intentions": [{"id": i, "intention": t}
                           for i, t in methodlib.list_intentions(state.library)]}


def _tool_get_reference_method_by_id(state: SessionState, method_id=None):
    entry = methodlib.get_method_by_id(state.library, method_id)
    return entry.to_record()


def _tool_generate_bias_report(state: SessionState, **_args):
    citations = [
        e.id for e in methodlib.retrieve(
            state.library,
            methodlib.RetrievalQuery(state.scenario(), state.task.question,
                                     top_k=2))
    ]
    report = assemble_report(
        task_summary=state.task.question,
        scenario=state.scenario(),
        findings=state.findings,
        charts=state.charts,
        method_citations=citations,
        complete=True,
        errors=tuple(state.errors),
    )
    state.artifacts["report"] = report
    if state.out_dir is not None:
        import os
        with open(os.path.join(state.out_dir, "report.md"), "w",
                  encoding="utf-8") as fh:
            fh.write(report.to_markdown())
        with open(os.path.join(state.out_dir, "findings.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(report.to_json())
    return {"headline_level": report.headline.value,
            "findings": len(report.findings), "charts": list(report.charts)}


def build_registry() -> ToolRegistry:
    """The built-in offline toolset (no generated-code execution)."""
    entries = {}

    def add(name, signature, description, executor):
        entries[name] = ToolEntry(name, signature, description, executor)

    add("get_csv_features", "(path)",
        "Reads a delimited file and returns all feature names.",
        _tool_get_csv_features)
    add("load_csv_file", "(path)",
        "Loads a delimited file into the session as a typed table.",
        _tool_load_csv_file)
    add("extract_single_column", "(column)",
        "Extracts a single column into the working subset.",
        _tool_extract_single_column)
    add("extract_two_columns", "(column_a, column_b)",
        "Extracts two columns into the working subset.",
        _tool_extract_two_columns)
    add("clean_missing_values", "(columns, mode)",
        "Cleans missing or invalid values from the working subset.",
        _tool_clean_missing_values)
    add("normalize_or_standardize_data", "(column, mode)",
        "Normalizes or standardizes a numerical column.",
        _tool_normalize_or_standardize)
    add("group_and_aggregate", "(by, target, fn)",
        "Groups by one column and aggregates another.",
        _tool_group_and_aggregate)
    for tool_name, metric_id in DETECTION_TOOLS.items():
        add(tool_name, "()",
            f"Runs the {metric_id} bias metric on the task features and maps "
            f"the result to a severity level.",
            _make_detection_executor(metric_id))
    for tool_name, kind in CHART_TOOLS.items():
        add(tool_name, "()",
            f"Renders a {kind.value} chart of the task features to SVG.",
            _make_chart_executor(tool_name, kind))
    add("get_user_input_tool", "(prompt)",
        "Captures user input during an interaction.",
        _tool_get_user_input)
    add("get_all_reference_intentions", "()",
        "Lists all method-library entries as (id, intention) pairs.",
        _tool_get_all_reference_intentions)
    add("get_reference_method_by_id", "(method_id)",
        "Fetches one method-library entry by its id.",
        _tool_get_reference_method_by_id)
    add("generate_bias_report", "()",
        "Assembles the findings, charts, and recommendations into the "
        "detection report (markdown + JSON).",
        _tool_generate_bias_report)
    return ToolRegistry(entries=entries)


# --------------------------------------------------------------------------
# User input
# --------------------------------------------------------------------------

def get_user_input(state: SessionState, reader=None) -> str:
    """Next user message: scripted follow-ups in batch mode, stdin otherwise."""
    if state.task.interactive:
        reader = reader or input
        while True:
            try:
                message = reader("> ")
            except EOFError:
                raise EndOfInputError("stdin closed") from None
            if message is None:
                raise EndOfInputError("no more input")
            if str(message).strip():
                return str(message)
    if state.followup_index < len(state.task.followups):
        message = state.task.followups[state.followup_index]
        state.followup_index += 1
        return message
    raise EndOfInputError("scripted follow-ups exhausted")


# --------------------------------------------------------------------------
# Advisor
# --------------------------------------------------------------------------

def advisor_review(payload: dict, state: SessionState) -> Critique:
    """Deterministic rule-mode critique of a plan, results, or report."""
    kind = payload.get("kind")
    if kind == "plan":
        scenario = Scenario(payload["scenario"])
        required = [METRIC_TO_TOOL[m] for m in SCENARIO_METRICS[scenario]]
        scheduled = set(payload.get("scheduled", ()))
        missing = [t for t in required if t not in scheduled]
        issues = []
        suggestions = []
        if missing:
            issues.append(f"plan misses scenario metrics: {', '.join(missing)}")
            suggestions = [Action(ActionKind.INVOKE_TOOL, tool=t,
                                  rationale="advisor: schedule missing metric")
                           for t in missing]
        if not payload.get("cleaning_done"):
            issues.append("cleaning must precede detection")
        if issues:
            return Critique(Verdict.REVISE, tuple(issues), tuple(suggestions))
        return Critique(Verdict.APPROVE)
    if kind == "results":
        unrecovered = payload.get("unrecovered_errors", ())
        if unrecovered:
            return Critique(Verdict.REVISE,
                            tuple(f"tool failed without retry: {e}"
                                  for e in unrecovered))
        if not payload.get("findings"):
            return Critique(Verdict.REVISE, ("no metric produced a finding",))
        return Critique(Verdict.APPROVE)
    if kind == "report":
        report = state.artifacts.get("report")
        issues = []
        if report is None:
            issues.append("no report assembled")
        else:
            if not all(f.level.label for f in report.findings):
                issues.append("findings lack level labels")
            if not report.recommendations:
                issues.append("report lacks recommendations")
        if issues:
            return Critique(Verdict.REVISE, tuple(issues))
        return Critique(Verdict.APPROVE)
    return Critique(Verdict.REVISE, (f"unknown consultation payload {kind!r}",))


# --------------------------------------------------------------------------
# Planners
# --------------------------------------------------------------------------

class RulePlanner:
    """Fixed deterministic policy standing in for an LLM primary agent."""

    def next(self, state: SessionState) -> Action:
        stage = state.stage
        task = state.task
        if stage is Stage.USER_INPUT:
            return Action(ActionKind.TRANSITION, stage=Stage.PREPROCESSING,
                          rationale=f"task parsed: features={list(task.features)} "
                                    f"bias_type={task.bias_type.value}")
        if stage is Stage.PREPROCESSING:
            if "table" not in state.artifacts:
                return Action(ActionKind.INVOKE_TOOL, tool="load_csv_file",
                              args={"path": task.dataset},
                              rationale="load the dataset")
            if "subset" not in state.artifacts:
                if len(task.features) == 1:
                    return Action(ActionKind.INVOKE_TOOL,
                                  tool="extract_single_column",
                                  args={"column": task.features[0]},
                                  rationale="restrict to the task feature")
                return Action(ActionKind.INVOKE_TOOL,
                              tool="extract_two_columns",
                              args={"column_a": task.features[0],
                                    "column_b": task.features[1]},
                              rationale="restrict to the task features")
            if "clean" not in state.artifacts:
                return Action(ActionKind.INVOKE_TOOL,
                              tool="clean_missing_values",
                              args={"columns": list(task.features),
                                    "mode": "drop_row"},
                              rationale="drop rows with missing task cells")
            if "plan" not in state.consulted:
                scenario = state.scenario()
                return Action(
                    ActionKind.CONSULT_ADVISOR,
                    payload={"kind": "plan", "scenario": scenario.value,
                             "scheduled": [METRIC_TO_TOOL[m]
                                           for m in SCENARIO_METRICS[scenario]],
                             "cleaning_done": True},
                    rationale="advisor check before detection")
            return Action(ActionKind.TRANSITION, stage=Stage.DETECTION,
                          rationale="preprocessing complete")
        if stage is Stage.DETECTION:
            scenario = state.scenario()
            for metric_id in SCENARIO_METRICS[scenario]:
                if metric_id not in state.attempted_metrics:
                    return Action(ActionKind.INVOKE_TOOL,
                                  tool=METRIC_TO_TOOL[metric_id],
                                  rationale=f"run scenario metric {metric_id}")
            if "results" not in state.consulted:
                return Action(
                    ActionKind.CONSULT_ADVISOR,
                    payload={"kind": "results",
                             "findings": len(state.findings),
                             "unrecovered_errors": []},
                    rationale="advisor check on detection results")
            return Action(ActionKind.TRANSITION,
                          stage=Stage.VISUALIZATION_SUMMARY,
                          rationale="all scenario metrics attempted")
        if stage is Stage.VISUALIZATION_SUMMARY:
            if not state.charts:
                return Action(ActionKind.INVOKE_TOOL,
                              tool=SCENARIO_CHART[state.scenario()],
                              rationale="chart kind chosen by scenario")
            if "report" not in state.artifacts:
                return Action(ActionKind.INVOKE_TOOL,
                              tool="generate_bias_report",
                              rationale="assemble the detection report")
            return Action(ActionKind.TRANSITION, stage=Stage.FEEDBACK,
                          rationale="report assembled")
        # Stage.FEEDBACK
        if "report" not in state.consulted:
            return Action(ActionKind.CONSULT_ADVISOR,
                          payload={"kind": "report"},
                          rationale="advisor check before finishing")
        if task.interactive and state.followup_index < len(task.followups):
            return Action(ActionKind.ASK_USER, prompt="Any further requests?",
                          rationale="interactive feedback round")
        return Action(ActionKind.FINISH, rationale="task complete")


class ScriptedPlanner:
    """Replays a fixed action list; for tests and fixture logs."""

    def __init__(self, actions):
        self.actions = list(actions)
        self.cursor = 0

    def next(self, state: SessionState) -> Action:
        if self.cursor >= len(self.actions):
            return Action(ActionKind.FINISH, rationale="script exhausted")
        action = self.actions[self.cursor]
        self.cursor += 1
        return action


@dataclass(frozen=True)
class ChatConfig:
    base_url: str
    model: str
    key_env: str = "BIASAUDIT_API_KEY"
    timeout_s: float = 30.0
    max_retries: int = 3


def _default_transport(url, headers, payload, timeout_s):
    body = json.dumps(payload).encode("utf-8")
    request = urllib.request.Request(url, data=body, headers=headers,
                                     method="POST")
    try:
        with urllib.request.urlopen(request, timeout=timeout_s) as response:
            return json.loads(response.read().decode("utf-8"))
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise NetworkError(str(exc)) from exc


def chat_complete(messages, tool_descriptions, config: ChatConfig,
                  transport=None, sleep=time.sleep) -> dict:
    """One chat-completion round trip with retry/backoff on network errors."""
    import os
    transport = transport or _default_transport
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(config.key_env, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    payload = {"model": config.model, "messages": messages,
               "tools": [{"type": "function",
                          "function": {"name": t["name"],
                                       "description": t["description"]}}
                         for t in tool_descriptions],
               "temperature": 0}
    last = None
    for attempt in range(config.max_retries):
        try:
            return transport(config.base_url, headers, payload, config.timeout_s)
        except NetworkError as exc:
            last = exc
            if attempt + 1 < config.max_retries:
                sleep(0.2 * 2 ** attempt)
    raise NetworkError(f"chat endpoint failed after "
                       f"{config.max_retries} attempts: {last}")


_PRIMARY_FRAME = (
    "You are the primary analyst for a tabular bias audit. Communicate with "
    "the user, develop a detection plan covering preprocessing, detection "
    "metrics, visualization, and summarization, select tools from the "
    "registry below, and finish with a report. Reply with a tool call, or "
    "with TRANSITION:<stage>, or with FINISH."
)


class ChatPlanner:
    """Delegates planning to a chat-completion endpoint."""

    def __init__(self, config: ChatConfig, transport=None):
        self.config = config
        self.transport = transport

    def next(self, state: SessionState) -> Action:
        messages = self._render(state)
        tools = state.registry.descriptions()
        reply = chat_complete(messages, tools, self.config,
                              transport=self.transport)
        action = self._parse(reply, state)
        if action is None:
            messages.append({
                "role": "system",
                "content": "Reply strictly with one tool call, "
                           "TRANSITION:<stage>, or FINISH."})
            reply = chat_complete(messages, tools, self.config,
                                  transport=self.transport)
            action = self._parse(reply, state)
        if action is None:
            raise PlannerError("chat reply was unparseable after one retry")
        return action

    def _render(self, state: SessionState) -> list:
        summary = {
            "stage": state.stage.value,
            "question": state.task.question,
            "features": list(state.task.features),
            "artifacts": sorted(state.artifacts),
            "findings": len(state.findings),
            "errors": state.errors[-3:],
            "budget": state.budget,
        }
        return [
            {"role": "system", "content": _PRIMARY_FRAME},
            {"role": "user", "content": json.dumps(summary, sort_keys=True)},
        ]

    def _parse(self, reply: dict, state: SessionState):
        try:
            message = reply["choices"][0]["message"]
        except (KeyError, IndexError, TypeError):
            return None
        calls = message.get("tool_calls") or []
        if calls:
            fn = calls[0].get("function", {})
            name = fn.get("name")
            if not name:
                return None
            try:
                args = json.loads(fn.get("arguments") or "{}")
            except json.JSONDecodeError:
                return None
            return Action(ActionKind.INVOKE_TOOL, tool=name, args=args,
                          rationale="chat planner tool call")
        content = (message.get("content") or "").strip()
        if content.upper().startswith("FINISH"):
            return Action(ActionKind.FINISH, rationale="chat planner finish")
        if content.upper().startswith("TRANSITION:"):
            target = content.split(":", 1)[1].strip().lower()
            try:
                return Action(ActionKind.TRANSITION, stage=Stage(target),
                              rationale="chat planner transition")
            except ValueError:
                return None
        return None


# --------------------------------------------------------------------------
# Session loop
# --------------------------------------------------------------------------

def _legal_transition(current: Stage, target: Stage) -> bool:
    ci = STAGE_ORDER.index(current)
    ti = STAGE_ORDER.index(target)
    return ti <= ci + 1  # one step forward, or back to any earlier stage


def _incomplete_report(state: SessionState) -> ReportDocument:
    try:
        scenario = state.scenario()
    except (BiasAuditError, Exception):
        scenario = Scenario.CAT_DIST
    return ReportDocument(
        task_summary=state.task.question,
        scenario=scenario,
        findings=tuple(state.findings),
        charts=tuple(state.charts),
        recommendations=("run incomplete: increase the step budget and retry",),
        complete=False,
        errors=tuple(state.errors),
    )


def run_session(task: TaskContext, planner, registry: ToolRegistry,
                budget: int = 64, thresholds: ThresholdTable = DEFAULT_TABLE,
                opts: MetricOptions = MetricOptions(), out_dir=None,
                library=None, clock=None):
    """Drive one workflow session to a report and a structured log.

    ``clock`` supplies event timestamps in ms; the default always returns 0
    so offline runs are byte-identical.
    """
    if library is None:
        library = methodlib.builtin_library()
    clock = clock or (lambda: 0)
    state = SessionState(task=task, registry=registry, thresholds=thresholds,
                         opts=opts, out_dir=out_dir, library=library,
                         budget=budget)
    log = state.log
    log.append(Stage.USER_INPUT, "user", "task",
               {"question": task.question, "dataset": task.dataset,
                "features": list(task.features),
                "bias_type": task.bias_type.value}, clock())

    while state.budget > 0:
        action = _next_action(planner, state, log, clock)
        state.budget -= 1
        log.append(state.stage, "primary", "action", action.to_record(), clock())
        if action.kind is ActionKind.FINISH:
            report = state.artifacts.get("report")
            if report is None:
                report = _incomplete_report(state)
            log.append(state.stage, "primary", "finish",
                       {"complete": report.complete,
                        "headline": report.headline.value if report.findings else None},
                       clock())
            return report, log
        _execute(action, state, log, clock)

    report = _incomplete_report(state)
    log.append(state.stage, "system", "budget_exhausted",
               {"findings": len(state.findings)}, clock())
    return report, log


def _next_action(planner, state: SessionState, log: SessionLog, clock) -> Action:
    action = planner.next(state)
    problem = _illegal(action, state)
    if problem is None:
        state.last_planner_error = None
        return action
    log.append(state.stage, "system", "planner_error", {"error": problem}, clock())
    state.last_planner_error = problem
    action = planner.next(state)  # one retry
    problem = _illegal(action, state)
    if problem is None:
        state.last_planner_error = None
        return action
    raise PlannerError(problem)


def _illegal(action: Action, state: SessionState):
    if action.kind is ActionKind.INVOKE_TOOL:
        if action.tool not in state.registry:
            return f"unknown tool {action.tool!r}"
    if action.kind is ActionKind.TRANSITION:
        if action.stage is None or not _legal_transition(state.stage, action.stage):
            return (f"illegal transition {state.stage.value} -> "
                    f"{action.stage.value if action.stage else None}")
    return None


def _execute(action: Action, state: SessionState, log: SessionLog, clock):
    if action.kind is ActionKind.TRANSITION:
        previous = state.stage
        state.stage = action.stage
        log.append(state.stage, "system", "stage",
                   {"from": previous.value, "to": action.stage.value}, clock())
        return
    if action.kind is ActionKind.CONSULT_ADVISOR:
        critique = advisor_review(action.payload, state)
        state.consulted.add(action.payload.get("kind"))
        log.append(state.stage, "advisor", "critique", critique.to_record(),
                   clock())
        return
    if action.kind is ActionKind.ASK_USER:
        try:
            message = get_user_input(state)
            log.append(state.stage, "user", "message", {"text": message}, clock())
        except EndOfInputError:
            log.append(state.stage, "user", "end_of_input", {}, clock())
        return
    # InvokeTool
    entry = state.registry.get(action.tool)
    call_key = json.dumps([action.tool, action.args], sort_keys=True)
    try:
        result = entry.executor(state, **action.args)
        state.last_failed_call = None
        log.append(state.stage, "tool", "result",
                   {"tool": action.tool, "ok": True, "result": result}, clock())
    except (MetricError, TableError, ToolError, BiasAuditError) as exc:
        state.errors.append(f"{action.tool}: {exc}")
        log.append(state.stage, "tool", "result",
                   {"tool": action.tool, "ok": False, "error": str(exc)},
                   clock())
        # The same call failing twice in a row means the planner cannot make
        # progress (e.g. an unknown column); surface the error to the caller.
        if state.last_failed_call == call_key:
            raise
        state.last_failed_call = call_key
