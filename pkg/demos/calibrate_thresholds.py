"""Fit severity thresholds against graded synthetic suites.

Generates suites at five bias strengths for every scenario, measures each
metric on them, refits the four cut-points per metric, and prints the
per-metric accuracy table. Writing the fitted table to disk makes it
reusable via the thresholds_path config field.
"""

import sys

from biasaudit.metrics import Scenario
from biasaudit.severity import DEFAULT_TABLE
from biasaudit.synthgen import calibrate_scenarios


def main():
    table, report = calibrate_scenarios(list(Scenario), DEFAULT_TABLE)
    print(report.to_markdown())
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w", encoding="utf-8") as fh:
            fh.write(table.to_json())
        print(f"fitted thresholds written to {sys.argv[1]}", file=sys.stderr)


if __name__ == "__main__":
    main()
