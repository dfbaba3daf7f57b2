"""Write a scenario file by hand and run it the way the CLI does.

The Heisenberg structure x d/dy ^ d/dz is regular near (1,0,0), so a
Weinstein splitting along the x-axis should exist.  Everything the CLI needs
fits in a small JSON document.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

scenario = {
    "name": "heisenberg-by-hand",
    "description": "Heisenberg structure around (1,0,0)",
    "anchor": "Weinstein splitting",
    "kind": "poisson",
    "dim": 3,
    "transversal": {"p": 1, "center": [1.0, 0.0, 0.0]},
    "structure": {"bivector": {"2,3": "x1"}},
}

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "heis.json"
    path.write_text(json.dumps(scenario, indent=2))
    out = Path(tmp) / "report.json"
    proc = subprocess.run([sys.executable, "-m", "eulerlike", "run", str(path), "--samples", "30",
                           "--report", str(out)], capture_output=True, text=True)
    print(proc.stdout)
    print("exit code", proc.returncode)
    report = json.loads(out.read_text())
    print("checks:", ", ".join(c["name"] for c in report["checks"]))
