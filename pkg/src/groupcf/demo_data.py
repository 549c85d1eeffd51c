"""Deterministic synthetic HR table in the public IBM attrition schema.

Ships so the demo pipeline and the test suite run without the proprietary
download: 35 columns, Yes/No attrition, three departments. Attrition risk
is planted on the policy-controllable features, strongest on salary hike,
promotion recency and job satisfaction, so end-to-end runs have a known
ground truth to recover. Regenerate with
``python -m groupcf.demo_data out.csv [--rows N] [--seed S]``.
"""

from __future__ import annotations

import argparse
import csv

import numpy as np
from scipy.special import expit

DEFAULT_ROWS = 1470
DEFAULT_SEED = 7

COLUMNS = (
    "Age", "Attrition", "BusinessTravel", "DailyRate", "Department",
    "DistanceFromHome", "Education", "EducationField", "EmployeeCount",
    "EmployeeNumber", "EnvironmentSatisfaction", "Gender", "HourlyRate",
    "JobInvolvement", "JobLevel", "JobRole", "JobSatisfaction",
    "MaritalStatus", "MonthlyIncome", "MonthlyRate", "NumCompaniesWorked",
    "Over18", "OverTime", "PercentSalaryHike", "PerformanceRating",
    "RelationshipSatisfaction", "StandardHours", "StockOptionLevel",
    "TotalWorkingYears", "TrainingTimesLastYear", "WorkLifeBalance",
    "YearsAtCompany", "YearsInCurrentRole", "YearsSinceLastPromotion",
    "YearsWithCurrManager",
)

_JOB_ROLES = {
    "Research & Development": (
        "Research Scientist", "Laboratory Technician", "Manufacturing Director",
        "Healthcare Representative", "Research Director", "Manager",
    ),
    "Sales": ("Sales Executive", "Sales Representative", "Manager"),
    "Human Resources": ("Human Resources", "Manager"),
}

# Attrition log-odds coefficients on z-scored actionable columns. The top
# three drivers (salary hike, promotion recency, job satisfaction) stand
# well clear of the rest so a classifier can recover the ordering.
_ATTRITION_COEFS = {
    "PercentSalaryHike": -1.10,
    "YearsSinceLastPromotion": +1.05,
    "JobSatisfaction": -0.95,
    "MonthlyIncome": -0.25,
    "EnvironmentSatisfaction": -0.20,
    "JobInvolvement": -0.15,
    "YearsInCurrentRole": -0.10,
    "YearsWithCurrManager": -0.10,
}
_BASE_ATTRITION_RATE = 0.16


def _zscore(column):
    std = column.std()
    return (column - column.mean()) / (std if std > 0 else 1.0)


def generate_table(n_rows: int = DEFAULT_ROWS, seed: int = DEFAULT_SEED) -> dict:
    """Columns of the synthetic table as numpy arrays, keyed by name."""
    if n_rows < 1:
        raise ValueError("n_rows must be >= 1")
    rng = np.random.default_rng(seed)
    t = {}

    t["Department"] = rng.choice(
        ["Research & Development", "Sales", "Human Resources"],
        size=n_rows, p=[0.65, 0.30, 0.05],
    )
    survey = lambda p: rng.choice([1, 2, 3, 4], size=n_rows, p=p)
    t["EnvironmentSatisfaction"] = survey([0.19, 0.19, 0.30, 0.32])
    t["JobInvolvement"] = survey([0.06, 0.25, 0.58, 0.11])
    t["JobSatisfaction"] = survey([0.20, 0.19, 0.30, 0.31])
    t["RelationshipSatisfaction"] = survey([0.19, 0.21, 0.31, 0.29])
    t["WorkLifeBalance"] = survey([0.05, 0.23, 0.61, 0.11])

    t["MonthlyIncome"] = np.clip(
        np.round(np.exp(rng.normal(8.6, 0.55, size=n_rows))), 1009, 19999
    ).astype(int)
    hike_levels = np.arange(11, 26)
    hike_weights = (26.0 - hike_levels) ** 1.5
    t["PercentSalaryHike"] = rng.choice(
        hike_levels, size=n_rows, p=hike_weights / hike_weights.sum()
    )

    years_at_company = np.minimum(
        np.floor(rng.exponential(6.0, size=n_rows)), 37
    ).astype(int)
    t["YearsAtCompany"] = years_at_company
    t["YearsInCurrentRole"] = np.floor(
        years_at_company * rng.uniform(0.0, 0.85, size=n_rows)
    ).astype(int)
    t["YearsSinceLastPromotion"] = np.floor(
        years_at_company * rng.uniform(0.0, 0.70, size=n_rows)
    ).astype(int)
    t["YearsWithCurrManager"] = np.floor(
        years_at_company * rng.uniform(0.0, 0.85, size=n_rows)
    ).astype(int)

    logit = np.log(_BASE_ATTRITION_RATE / (1.0 - _BASE_ATTRITION_RATE))
    eta = np.full(n_rows, logit)
    for name, coef in _ATTRITION_COEFS.items():
        eta += coef * _zscore(t[name].astype(float))
    t["Attrition"] = np.where(rng.random(n_rows) < expit(eta), "Yes", "No")

    t["Age"] = np.clip(np.round(rng.normal(37, 9, size=n_rows)), 18, 60).astype(int)
    t["BusinessTravel"] = rng.choice(
        ["Travel_Rarely", "Travel_Frequently", "Non-Travel"],
        size=n_rows, p=[0.71, 0.19, 0.10],
    )
    t["DailyRate"] = rng.integers(102, 1500, size=n_rows)
    t["DistanceFromHome"] = rng.integers(1, 30, size=n_rows)
    t["Education"] = rng.choice([1, 2, 3, 4, 5], size=n_rows,
                                p=[0.12, 0.19, 0.39, 0.27, 0.03])
    t["EducationField"] = rng.choice(
        ["Life Sciences", "Medical", "Marketing", "Technical Degree",
         "Other", "Human Resources"],
        size=n_rows, p=[0.41, 0.31, 0.11, 0.09, 0.06, 0.02],
    )
    t["EmployeeCount"] = np.ones(n_rows, dtype=int)
    t["EmployeeNumber"] = np.arange(1, n_rows + 1)
    t["Gender"] = rng.choice(["Male", "Female"], size=n_rows, p=[0.6, 0.4])
    t["HourlyRate"] = rng.integers(30, 101, size=n_rows)
    t["JobLevel"] = (
        np.digitize(t["MonthlyIncome"], [2500, 5000, 10000, 15000]) + 1
    )
    t["JobRole"] = np.array([
        rng.choice(_JOB_ROLES[dept]) for dept in t["Department"]
    ])
    t["MaritalStatus"] = rng.choice(["Married", "Single", "Divorced"],
                                    size=n_rows, p=[0.46, 0.32, 0.22])
    t["MonthlyRate"] = rng.integers(2094, 27000, size=n_rows)
    t["NumCompaniesWorked"] = np.minimum(
        rng.poisson(2.6, size=n_rows), 9
    ).astype(int)
    t["Over18"] = np.full(n_rows, "Y")
    t["OverTime"] = rng.choice(["No", "Yes"], size=n_rows, p=[0.72, 0.28])
    t["PerformanceRating"] = np.where(t["PercentSalaryHike"] >= 20, 4, 3)
    t["StandardHours"] = np.full(n_rows, 80, dtype=int)
    t["StockOptionLevel"] = rng.choice([0, 1, 2, 3], size=n_rows,
                                       p=[0.43, 0.40, 0.11, 0.06])
    t["TotalWorkingYears"] = np.minimum(
        years_at_company + np.floor(rng.exponential(4.0, size=n_rows)).astype(int),
        40,
    )
    t["TrainingTimesLastYear"] = np.minimum(
        rng.poisson(2.8, size=n_rows), 6
    ).astype(int)
    return t


def write_csv(path, n_rows: int = DEFAULT_ROWS, seed: int = DEFAULT_SEED):
    """Write the synthetic table to ``path`` and return the row count."""
    table = generate_table(n_rows, seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for i in range(n_rows):
            writer.writerow([table[c][i] for c in COLUMNS])
    return n_rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Write a deterministic synthetic HR attrition CSV."
    )
    parser.add_argument("out", help="output CSV path")
    parser.add_argument("--rows", type=int, default=DEFAULT_ROWS)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args(argv)
    n = write_csv(args.out, args.rows, args.seed)
    print(f"wrote {n} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
