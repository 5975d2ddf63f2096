"""Generate the synthetic sample intake cohort (intake_sample.csv).

The rows are synthetic. Each day draws a person-level appetite factor and,
per food group, a zero-inflated gamma number of servings, so that the
cohort's nutrient totals land near published summary statistics for older
women with hypertension (mean sodium about 3400 mg, most days above 2300 mg).
"""

import csv
import random
import statistics
from pathlib import Path

SEED = 20240607
ROWS = 50
CAP = 8.0

# (probability the group appears on a given day, mean servings when it does)
HABITS = {
    "Milk": (0.55, 1.0), "Cream": (0.35, 1.0), "Ice Cream": (0.12, 1.0), "Cheese": (0.5, 1.3),
    "Beef": (0.3, 1.4), "Pork": (0.25, 1.0), "Red Meat (Other)": (0.08, 1.0), "Chicken, Turkey": (0.45, 1.2),
    "Sausages": (0.25, 0.9), "Fish": (0.15, 1.0), "Stew": (0.18, 1.2), "Frozen Meals": (0.1, 1.0),
    "Egg Meals": (0.4, 1.3), "Beans": (0.15, 0.8), "Nuts": (0.15, 1.0), "Seeds": (0.04, 0.8),
    "Bread": (0.85, 3.0), "Cakes, Biscuits, Pancakes": (0.45, 1.2), "Noodle, Rice": (0.4, 1.0),
    "Cereal": (0.35, 1.0), "Fast Foods": (0.4, 1.0), "Meat Substitutes": (0.03, 0.8),
    "Citrus Fruits": (0.2, 0.8), "Dried Fruits": (0.05, 1.0), "Tropical Fruits": (0.35, 0.9),
    "Fruit Juice": (0.3, 0.9), "Potato products": (0.4, 1.1), "Greens": (0.3, 1.5),
    "Squash/Roots": (0.2, 0.9), "Tomato products": (0.45, 1.0), "Vegetables": (0.5, 1.0),
    "Puerto Rican Food": (0.03, 1.0), "Smoothies": (0.03, 1.0), "Butter, Oils": (0.5, 1.2),
    "Salad Dressing": (0.3, 1.2), "Desserts": (0.2, 0.8), "Caffeinated Drinks": (0.55, 1.3),
    "Nutritional Shakes": (0.06, 1.0),
}


def load_matrix(here):
    with open(here / "nutrients.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    return rows


def main():
    here = Path(__file__).resolve().parent
    with open(here / "food_groups.csv", newline="") as f:
        groups = [r["group"] for r in csv.DictReader(f)]
    assert sorted(groups) == sorted(HABITS), "habit table must cover every group"
    rng = random.Random(SEED)
    days = []
    for _ in range(ROWS):
        appetite = rng.lognormvariate(0.15, 0.25)
        row = []
        for g in groups:
            p, mean = HABITS[g]
            s = rng.gammavariate(3.0, mean / 3.0) * appetite if rng.random() < p else 0.0
            row.append(round(min(s, CAP), 2))
        days.append(row)
    with open(here / "intake_sample.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(groups)
        w.writerows(days)

    matrix = {r["group"]: r for r in load_matrix(here)}
    for nutrient in ["sodium_mg", "fiber_g", "saturated_fat_g", "carbohydrate_g"]:
        totals = [sum(float(matrix[g][nutrient]) * s for g, s in zip(groups, d)) for d in days]
        print(f"{nutrient}: mean {statistics.mean(totals):.1f} sd {statistics.stdev(totals):.1f}")
    sodium = [sum(float(matrix[g]["sodium_mg"]) * s for g, s in zip(groups, d)) for d in days]
    print(f"sodium > 2300: {sum(v > 2300 for v in sodium) / len(sodium):.2f}")


if __name__ == "__main__":
    main()
