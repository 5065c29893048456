"""Regenerate the bundled sample dataset and taskset.

Writes src/biasaudit/data/sample.csv (a small mixed-type table with a few
planted biases and missing cells) and sample_taskset.json (15 tasks split
6/6/3 across distribution, correlation, and implication questions).
"""

import csv
import json
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parents[1] / "src/biasaudit/data"

N = 400


def make_csv():
    rng = np.random.default_rng(42)
    gender = rng.choice(["male", "female", "nonbinary"], size=N,
                        p=[0.62, 0.35, 0.03])
    region = rng.choice(["north", "south", "east", "west"], size=N,
                        p=[0.3, 0.27, 0.23, 0.2])
    age = np.clip(rng.normal(38, 12, size=N), 18, 80).round(1)
    # hours mildly right-skewed, correlated with age
    hours = np.clip(30 + 0.2 * (age - 38) + rng.gamma(2.0, 3.0, size=N),
                    5, 80).round(1)
    # score depends on age (num/num correlation) and gender (cat/num gap)
    score = (55 + 0.45 * (age - 38) + np.where(gender == "male", 6.0, 0.0)
             + rng.normal(0, 8, size=N)).round(2)
    # income level associated with gender (cat/cat)
    income_level = np.empty(N, dtype=object)
    for i in range(N):
        if gender[i] == "male":
            p = [0.2, 0.45, 0.35]
        else:
            p = [0.45, 0.4, 0.15]
        income_level[i] = rng.choice(["low", "medium", "high"], p=p)

    rows = []
    for i in range(N):
        row = [gender[i], region[i], f"{age[i]}", f"{hours[i]}",
               f"{score[i]}", income_level[i]]
        rows.append(row)
    # plant a few missing cells
    for i in (7, 42, 199):
        rows[i][2] = "NA"
    for i in (13, 88):
        rows[i][4] = ""
    rows[57][0] = "?"

    with open(DATA / "sample.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gender", "region", "age", "hours", "score",
                         "income_level"])
        writer.writerows(rows)


TASKS = [
    # distribution (6)
    ("T-01", "distribution", ["gender"],
     "Can you check whether the gender distribution is balanced?", "high"),
    ("T-02", "distribution", ["region"],
     "Is any region over-represented in the data?", "medium"),
    ("T-03", "distribution", ["income_level"],
     "Check the spread of income levels for imbalance.", "medium"),
    ("T-04", "distribution", ["age"],
     "Is the age distribution skewed or outlier-heavy?", "medium"),
    ("T-05", "distribution", ["hours"],
     "Audit weekly hours for asymmetry and outliers.", "low"),
    ("T-06", "distribution", ["score"],
     "Does the score distribution look symmetric and well behaved?", "low"),
    # correlation (6)
    ("T-07", "correlation", ["gender", "income_level"],
     "Is income level associated with gender?", "high"),
    ("T-08", "correlation", ["gender", "score"],
     "Do scores differ systematically across genders?", "high"),
    ("T-09", "correlation", ["age", "score"],
     "Are age and score correlated?", "medium"),
    ("T-10", "correlation", ["region", "income_level"],
     "Does income level depend on region?", "medium"),
    ("T-11", "correlation", ["region", "score"],
     "Do scores differ across regions?", "low"),
    ("T-12", "correlation", ["age", "hours"],
     "Are age and weekly hours dependent?", "low"),
    # implication (3)
    ("T-13", "implication", ["gender"],
     "Is there anything concerning about the gender feature?", "high"),
    ("T-14", "implication", ["age", "score"],
     "Could age act as a proxy for score?", "medium"),
    ("T-15", "implication", ["income_level"],
     "Anything biased about how income levels are recorded?", "medium"),
]


def make_taskset():
    records = [
        {"id": task_id, "dataset": "sample.csv", "question": question,
         "bias_type": bias_type, "features": features,
         "significance": significance}
        for task_id, bias_type, features, question, significance in TASKS
    ]
    with open(DATA / "sample_taskset.json", "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    make_csv()
    make_taskset()
    print(f"wrote {DATA / 'sample.csv'} and {DATA / 'sample_taskset.json'}")
