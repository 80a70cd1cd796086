"""Run the golden config into a temporary directory and show the bundle."""

import json
import tempfile
from pathlib import Path

from ncerg.experiment import run_experiment

config = json.loads((Path(__file__).resolve().parents[1] / "configs" / "golden.json").read_text())
with tempfile.TemporaryDirectory() as tmp:
    report = run_experiment(config, out_dir=tmp)
    print("files:", sorted(p.name for p in Path(tmp).iterdir()))
    print("terminal residual:", report["terminal_residual"])
    print("shared-limit residual:", report["shared_limit"])
    print("witness decision:", report["convergence"]["decision"])
    print(Path(tmp, "averages.csv").read_text().splitlines()[:5])
