#
# Copyright 2026 The streamsyn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Plot mean W1 against t from a `streamsyn bench` CSV.

usage: plot_bench.py bench.csv [out.png]

Needs matplotlib. Checkpoints where exact W1 was not evaluated use the tree
bound and are drawn hollow.
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main(argv):
    if len(argv) < 2:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    exact = defaultdict(list)
    bound = defaultdict(list)
    with open(argv[1]) as f:
        rows = csv.DictReader(line for line in f if not line.startswith("#"))
        for row in rows:
            t = int(row["t"])
            if row["w1_exact"]:
                exact[t].append(float(row["w1_exact"]))
            else:
                bound[t].append(float(row["w1_tree_bound"]))
    fig, ax = plt.subplots(figsize=(5, 4))
    for series, style in ((exact, "o-"), (bound, "o--")):
        ts = sorted(series)
        if not ts:
            continue
        means = [sum(series[t]) / len(series[t]) for t in ts]
        ax.plot(ts, means, style, mfc="none" if series is bound else None,
                label="exact W1" if series is exact else "tree bound")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("t")
    ax.set_ylabel("mean W1")
    ax.legend()
    fig.tight_layout()
    out = argv[2] if len(argv) > 2 else "bench.png"
    fig.savefig(out, dpi=150)
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
