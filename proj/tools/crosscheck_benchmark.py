"""Independent check of the committed benchmark report.

Runs the same protocol (100 random 50% leave-out rounds, 500 trees, sqrt
feature sampling, threshold 0.5) with scikit-learn on the fingerprints
exported by dump_fingerprints, and prints both reports side by side.
Random streams differ, so agreement is judged against the round-to-round
spread, not digit for digit.

    python3 tools/crosscheck_benchmark.py build/tools/dump_fingerprints
"""
import subprocess
import sys
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from sklearn.ensemble import RandomForestClassifier
from sklearn.metrics import accuracy_score, precision_score, recall_score, roc_auc_score

ROOT = Path(__file__).resolve().parent.parent


def main():
    dump = sys.argv[1]
    csv = subprocess.run([dump, str(ROOT / "data/benchmark_200.csv"), str(ROOT / "data/patterns/default.tsv")],
                         check=True, capture_output=True, text=True).stdout
    df = pd.read_csv(StringIO(csv))
    y = df["label"].to_numpy()
    X = df.drop(columns=["name", "label"]).to_numpy()
    n_hold = len(y) // 2
    rng = np.random.default_rng(42)
    scores = {"accuracy": [], "precision": [], "recall": [], "roc_auc": []}
    for r in range(100):
        while True:
            idx = rng.permutation(len(y))
            hold, train = idx[:n_hold], idx[n_hold:]
            if 0 < y[hold].sum() < len(hold) and 0 < y[train].sum() < len(train):
                break
        forest = RandomForestClassifier(n_estimators=500, max_features="sqrt", random_state=r)
        forest.fit(X[train], y[train])
        p = forest.predict_proba(X[hold])[:, 1]
        pred = (p >= 0.5).astype(int)
        scores["accuracy"].append(accuracy_score(y[hold], pred))
        scores["precision"].append(precision_score(y[hold], pred, zero_division=0))
        scores["recall"].append(recall_score(y[hold], pred, zero_division=0))
        scores["roc_auc"].append(roc_auc_score(y[hold], p))
    golden = (ROOT / "tests/golden/benchmark_200_report.txt").read_text()
    print("committed report:\n" + golden)
    print("scikit-learn:")
    for k, v in scores.items():
        v = np.asarray(v)
        if k == "roc_auc":
            print(f"{k}: {v.mean():.2f} (+/- {v.std():.2f})")
        else:
            print(f"{k}: {100 * v.mean():.2f}% (+/- {100 * v.std():.2f})")


if __name__ == "__main__":
    main()
