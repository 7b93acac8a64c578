"""Recognise places and activities from harvester signals alone.

Simulates a few wearers walking the default scenario, extracts windowed
features from the stored samples and scores the four classifiers.

    python demos/recognition.py [n_users]
"""

import sys
import warnings

from lifelogsim.config import DeviceConfig
from lifelogsim.environment import load_bundled
from lifelogsim.pipeline.dataset import simulate_users
from lifelogsim.pipeline.evaluation import cross_validate, map_labels


def main(n_users=3):
    table = simulate_users(load_bundled("default"), DeviceConfig(), n_users=n_users, seed=0)
    print(f"{n_users} wearers, {len(table)} windows, {table.X.shape[1]} features each\n")
    print(f"{'target':10s} {'model':7s} {'PD':>6s} {'PI':>6s}")
    for target in ("place8", "activity2"):
        y = map_labels(target, table.place, table.activity)
        for kind in ("knn", "dtree", "logreg", "gnb"):
            scores = []
            for scheme in ("pd", "pi"):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    rep = cross_validate(table.X, y, table.user, scheme, kind, order=table.time_rank())
                scores.append(rep.weighted_f)
            print(f"{target:10s} {kind:7s} {scores[0]:6.3f} {scores[1]:6.3f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3)
