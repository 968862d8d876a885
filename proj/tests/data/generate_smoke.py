"""Regenerates the small end-to-end fixtures under tests/data/smoke.

Needs rdkit. Targets are Crippen logP plus seeded noise, so they are learnable
from the molecular graph but not identical to any descriptor column.

    python3 tests/data/generate_smoke.py
"""

import csv
import json
import os
import random

from rdkit import Chem, RDLogger
from rdkit.Chem import Crippen

RDLogger.DisableLog("rdApp.*")
HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "smoke")


def corpus():
    rows = []
    with open(os.path.join(HERE, "corpus.smi")) as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            smi, ident = line.split()
            rows.append((smi, ident))
    return rows


def write_dataset(path, rows, rng, classify, cliff):
    logp = [Crippen.MolLogP(Chem.MolFromSmiles(s)) for s, _ in rows]
    median = sorted(logp)[len(logp) // 2]
    order = list(range(len(rows)))
    rng.shuffle(order)
    test = set(order[: len(rows) // 3])
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["smiles", "target", "split"] + (["is_cliff"] if cliff else []))
        for i, ((smi, _), lp) in enumerate(zip(rows, logp)):
            if classify:
                target = "1" if lp > median else "0"
            else:
                target = "%.4f" % (lp + rng.gauss(0.0, 0.1))
            row = [smi, target, "test" if i in test else "train"]
            if cliff:
                row.append("1" if rng.random() < 0.3 else "0")
            w.writerow(row)


def dominance(path, rng):
    # model A is 10 sigma better than B and C on every benchmark
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["benchmark", "model", "seed", "metric", "value", "orientation", "rmse_cliff", "rmse_noncliff"])
        for b in range(8):
            for model, mean in (("A", 1.0), ("B", 2.0), ("C", 2.05)):
                for seed in range(1, 6):
                    w.writerow(["bench%d" % b, model, seed, "rmse", "%.6f" % rng.gauss(mean, 0.1), "lower_better", "", ""])


def main():
    os.makedirs(OUT, exist_ok=True)
    rng = random.Random(20240611)
    rows = corpus()
    with open(os.path.join(OUT, "corpus.smi"), "w") as f:
        for smi, ident in rows[:300]:
            f.write("%s %s\n" % (smi, ident))
    write_dataset(os.path.join(OUT, "logp.csv"), rows[1000:1120], rng, classify=False, cliff=True)
    write_dataset(os.path.join(OUT, "logp_high.csv"), rows[1200:1320], rng, classify=True, cliff=False)
    suite = [
        {"id": "logp", "dataset": "logp.csv", "task": "regression", "metric": "rmse", "cliff_column": "is_cliff"},
        {"id": "logp_high", "dataset": "logp_high.csv", "task": "binary_classification", "metric": "roc_auc"},
    ]
    with open(os.path.join(OUT, "suite.json"), "w") as f:
        json.dump(suite, f, indent=2)
        f.write("\n")
    with open(os.path.join(OUT, "series.json"), "w") as f:
        json.dump(
            [
                {"label": "amines", "lead": "CCCCN", "members": ["CCCCCN", "CCCCCCN", "CCCCCCCCN", "c1ccccc1O"]},
                {"label": "phenols", "lead": "Oc1ccccc1", "members": ["Oc1ccccc1C", "Oc1ccc(C)cc1CC", "CCCCCCCC"]},
            ],
            f,
            indent=2,
        )
        f.write("\n")
    dominance(os.path.join(OUT, "dominance_results.csv"), rng)


if __name__ == "__main__":
    main()
