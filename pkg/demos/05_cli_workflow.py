"""Drive the command-line workflow end to end: synthesize a cube on disk,
run a two-strategy experiment grid from a JSON config, and aggregate the
curves into a plot-ready report."""

import json
import tempfile
from pathlib import Path

from flg.cli import main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    print("$ flg synth --classes 3 --bands 12 --size 32x32 --seed 5 --out cube")
    main(["synth", "--classes", "3", "--bands", "12", "--size", "32x32",
          "--seed", "5", "--separation", "1.0", "--out", str(tmp / "cube")])

    config = {
        "dataset": str(tmp / "cube"),
        "classifier": "mlr",
        "n_initial": 30,
        "batch_size": 15,
        "threshold": 75,
        "seeds": [0, 1, 2],
        "strategies": ["flg", "random"],
        "out_dir": str(tmp / "results"),
    }
    (tmp / "config.json").write_text(json.dumps(config, indent=2))
    print("\n$ flg run --config config.json")
    main(["run", "--config", str(tmp / "config.json")])

    print("outputs:")
    for path in sorted((tmp / "results").iterdir()):
        print(f"  {path.name}")

    print("\n$ flg report --in results/curves.csv --metric oa")
    main(["report", "--in", str(tmp / "results" / "curves.csv"), "--metric", "oa"])

    meta = json.loads((tmp / "results" / "meta.json").read_text())
    print(f"\nmeta.json records versions: {meta['versions']}")
