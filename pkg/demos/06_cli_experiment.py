"""Running an experiment through the command line, with caching.

The CLI reads a JSON config, writes a CSV (and optionally an SVG chart)
and caches correlation and coupling matrices on disk. A second run of the
same config hits the cache, and its CSV matches the first apart from the
timestamp line.
"""

import json
import os
import tempfile
import time

from risnf.cli import main

config = {
    "experiment": "RankVsSpacing",
    "sweep": {"spacings": [0.125, 0.25, 0.5], "ris_sizes": [[8, 8], [16, 8]]},
    "rank_thresholds": [1e-5],
}

with tempfile.TemporaryDirectory() as tmp:
    cfg_path = os.path.join(tmp, "rank.json")
    with open(cfg_path, "w") as fh:
        json.dump(config, fh, indent=2)
    out = os.path.join(tmp, "out")

    for attempt in ("cold cache", "warm cache"):
        t0 = time.perf_counter()
        code = main(["rank-vs-spacing", "--config", cfg_path, "--out", out, "--plot", "-q"])
        print(f"{attempt}: exit code {code}, {time.perf_counter() - t0:.2f} s")

    with open(os.path.join(out, "rank_vs_spacing.csv")) as fh:
        print(fh.read())
    print("files:", sorted(os.listdir(out)))
    print("cache entries:", len(os.listdir(os.path.join(out, "cache"))) // 2)

    # a typo in the config is rejected with its line number and exit code 2
    with open(cfg_path, "w") as fh:
        fh.write('{\n  "experiment": "RankVsSpacing",\n  "rank_treshold": 1e-5\n}\n')
    print("bad config exit code:", main(["RankVsSpacing", "--config", cfg_path, "-q"]))
