"""Regenerate configs/people.csv, the small census-style table used by configs/people_csv.json."""
from pathlib import Path

import numpy as np

rng = np.random.default_rng(2024)
jobs = ["clerk", "craft", "manager", "service"]
lines = ["age,hours,job,income,sex"]
for _ in range(400):
    male = rng.random() < 0.6
    job = jobs[rng.choice(4, p=[0.2, 0.35, 0.25, 0.2] if male else [0.35, 0.1, 0.15, 0.4])]
    age = int(rng.integers(18, 70))
    hours = int(np.clip(rng.normal(44 if male else 36, 8), 5, 90))
    z = 0.04 * (age - 40) + 0.05 * (hours - 40) + (1.0 if job == "manager" else 0.0) + (0.5 if male else 0.0)
    income = ">50K" if rng.random() < 1 / (1 + np.exp(-(z - 0.8))) else "<=50K"
    lines.append(f"{age},{hours},{job},{income},{'Male' if male else 'Female'}")
(Path(__file__).parent / "configs" / "people.csv").write_text("\n".join(lines) + "\n")
