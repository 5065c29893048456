"""Score the rule planner on the bundled 15-task benchmark.

Each task runs through a full session; the headline level is compared to
the ground-truth oracle (all five scenario metrics, max level). The rule
planner reuses the oracle's own machinery, so it scores 100 on every row;
a chat-backed planner can be slotted in via the CLI config to measure a
real agent instead.
"""

import sys
from importlib import resources

from biasaudit.bench import load_taskset, run_benchmark
from biasaudit.orchestrator import RulePlanner, build_registry


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else None
    taskset = str(resources.files("biasaudit.data")
                  .joinpath("sample_taskset.json"))
    tasks = load_taskset(taskset)
    report = run_benchmark(tasks, RulePlanner, build_registry(),
                           out_dir=out_dir)
    print(report.to_markdown())


if __name__ == "__main__":
    main()
