#!/usr/bin/env python3
"""Regenerates the synthetic demo dataset in crates/core/data/demo.

All values are invented. The script is seeded so reruns give the same files.
"""

import csv
import random
from fractions import Fraction
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "data" / "demo"
rng = random.Random(20230320)

DIMS = [("ux", "User experience"), ("pq", "Product quality"), ("sp", "Social promotion")]
INDICES = [
    ("ux.availability", "Availability", "ux", [("easy_to_learn", "Function is easy to learn"), ("easy_to_operate", "Easy to operate")], 3),
    ("ux.perceptibility", "Perceptibility", "ux", [("audio_visual", "Audio-visual effect"), ("interactive_feedback", "Interactive feedback")], 3),
    ("ux.cost", "Cost consideration", "ux", [("direct", "Direct cost"), ("indirect", "Indirect cost")], 2),
    ("ux.service", "Service experience", "ux", [("needs_and_values", "Needs and values considered"), ("after_sales", "After-sales service")], 2),
    ("pq.security", "Security", "pq", [("information_security", "Information security"), ("system_stability", "System stability")], 2),
    ("pq.innovation", "Innovation", "pq", [("functional", "Functional innovation"), ("incentive", "Incentive mechanism")], 2),
    ("sp.ethics", "Ethics", "sp", [("service", "Service"), ("special_customization", "Special customization")], 3),
    ("sp.social_integration", "Social integration", "sp", [("policy_awareness", "Policy awareness"), ("social_integration", "Social integration")], 4),
]
BONUS = [("bonus.compliance", "Compliance"), ("bonus.sociability", "Sociability")]
# Candidates that appear in round 1 only and are meant to be screened out.
CANDIDATES = [
    ("ux.availability.voice_only", "Voice-only operation", "ux.availability"),
    ("pq.innovation.gamification", "Gamified tasks", "pq.innovation"),
    ("sp.ethics.data_sharing", "Optional data sharing", "sp.ethics"),
]

SAATY = [Fraction(1, k) for k in range(9, 1, -1)] + [Fraction(k) for k in range(1, 10)]


def write(name, header, rows):
    path = OUT / name
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def tree_rows(extra=False):
    rows = [(d, n, "dimension", "", "false") for d, n in DIMS]
    for iid, name, dim, items, _ in INDICES:
        rows.append((iid, name, "index", dim, "false"))
        rows += [(f"{iid}.{k}", n, "item", iid, "false") for k, n in items]
    rows.append(("bonus", "Bonus indicators", "dimension", "", "true"))
    rows += [(b, n, "index", "bonus", "true") for b, n in BONUS]
    if extra:
        rows += [(c, n, "item", p, "false") for c, n, p in CANDIDATES]
    return sorted(rows)


def clamp(x, lo, hi):
    return max(lo, min(hi, x))


def experts():
    groups = ["decision_maker"] * 3 + ["technology_developer"] * 8 + ["social_technology_researcher"] * 9 + ["technology_implementer"] * 3 + ["other"] * 2
    fam = ["very_familiar"] * 10 + ["familiar"] * 11 + ["moderate"] * 4
    rng.shuffle(groups)
    rng.shuffle(fam)
    rows = []
    for i in range(25):
        rows.append((
            f"e{i + 1:02d}",
            groups[i],
            fam[i],
            rng.choice(["large", "large", "medium"]),
            rng.choice(["large", "large", "large", "medium"]),
            rng.choice(["medium", "small"]),
            rng.choice(["medium", "small"]),
        ))
    return rows


def ratings(ids, means, spread, missing=()):
    rows = []
    for i in range(25):
        eid = f"e{i + 1:02d}"
        if eid in missing:
            rows.append([eid] + [""] * len(ids))
            continue
        lean = rng.gauss(0, 0.3)
        rows.append([eid] + [clamp(round(means[j] + lean + rng.gauss(0, spread)), 1, 5) for j in ids])
    return rows


def saaty(x):
    return min(SAATY, key=lambda s: abs(float(s) - x) if x >= 1 else abs(float(1 / s) - 1 / x))


def fmt(fr):
    return str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"


def pairwise(name, ids, weights):
    n = len(ids)
    m = [[Fraction(1)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            ratio = weights[i] / weights[j] * rng.choice([0.9, 1.0, 1.0, 1.15])
            m[i][j] = saaty(ratio)
            m[j][i] = 1 / m[i][j]
    write(f"pairwise/{name}.csv", ["id"] + ids, [[ids[i]] + [fmt(x) for x in m[i]] for i in range(n)])
    return f"pairwise/{name}.csv"


def main():
    final_rows = tree_rows()
    write("indicators.csv", ["id", "name", "level", "parent_id", "bonus"], final_rows)
    write("indicators_round1.csv", ["id", "name", "level", "parent_id", "bonus"], tree_rows(extra=True))
    write("experts.csv", ["id", "group", "familiarity", "basis_theory", "basis_practice", "basis_peer", "basis_intuition"], experts())

    final_ids = [r[0] for r in final_rows]
    means = {i: rng.uniform(3.9, 4.8) for i in final_ids}
    round1_ids = sorted(final_ids + [c[0] for c in CANDIDATES])
    means.update({c[0]: rng.uniform(2.0, 2.6) for c in CANDIDATES})
    write("ratings_round1.csv", ["expert_id"] + round1_ids, ratings(round1_ids, means, 0.9))
    write("ratings_round2.csv", ["expert_id"] + final_ids, ratings(final_ids, means, 0.7))
    missing = {"e04", "e09", "e13", "e18", "e22"}
    write("ratings_round3.csv", ["expert_id"] + final_ids, ratings(final_ids, means, 0.5, missing))

    matrices = []
    matrices.append(pairwise("dimensions", [d for d, _ in DIMS], [0.45, 0.33, 0.22]))
    for dim, _ in DIMS:
        ids = [i[0] for i in INDICES if i[2] == dim]
        matrices.append(pairwise(dim, ids, [rng.uniform(1, 3) for _ in ids]))
    for iid, _, _, items, _ in INDICES:
        ids = [f"{iid}.{k}" for k, _ in items]
        matrices.append(pairwise(iid, ids, [rng.uniform(1, 2) for _ in ids]))
    matrices.append(pairwise("bonus", [b for b, _ in BONUS], [1.2, 1.0]))

    header = ["respondent_id"] + [f"q{k}" for k in range(1, 22)]
    rows = []
    for r in range(26):
        person = rng.gauss(0, 0.6)
        row = [f"r{r + 1:02d}"]
        for iid, _, _, _, nq in INDICES:
            facet = rng.gauss(0, 0.5)
            row += [clamp(round(2.8 + person + facet + rng.gauss(0, 0.55)), 0, 4) for _ in range(nq)]
        rows.append(row)
    rows[6][5] = ""
    rows[19][17] = ""
    write("responses.csv", header, rows)

    write("expert_bonus.csv", ["expert_id", "compliance", "sociability"],
          [[f"x{k}", rng.choice([2, 3, 3, 4]), rng.choice([1, 2, 3, 3])] for k in range(1, 6)])

    items = [f"{iid}.{k}" for iid, _, _, its, _ in INDICES for k, _ in its]
    rows = []
    for k in range(13):
        rows.append([f"k{k + 1:02d}"] + [rng.choice([5, 6, 6, 7, 7, 7, 7]) if rng.random() > 0.06 else 4 for _ in items])
    write("importance.csv", ["rater_id"] + items, rows)

    lines = [
        "# Synthetic demo run. Paths are relative to this file.",
        'indicators = "indicators.csv"',
        "",
        "[consensus]",
        'experts = "experts.csv"',
        "scale_max = 5",
        "",
    ]
    for k in (1, 2, 3):
        lines += ["[[consensus.rounds]]", f"round_no = {k}", f'ratings = "ratings_round{k}.csv"']
        lines.append('indicators = "indicators_round1.csv"' if k == 1 else 'indicators = "indicators.csv"')
        lines.append("")
    lines += ["[weights]", 'method = "combined"', "matrices = ["]
    lines += [f'  "{m}",' for m in matrices]
    lines += ["]", "", "[reliability]", 'responses = "responses.csv"', "",
              "[validity]", 'importance = "importance.csv"', "relevance_floor = 5", "",
              "[score]", 'expert_bonus = "expert_bonus.csv"', "bonus_cap = 10.0", ""]
    (OUT / "pipeline.toml").write_text("\n".join(lines), encoding="utf-8")


if __name__ == "__main__":
    main()
