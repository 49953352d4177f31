"""
Command-line walkthrough
========================

Writes a small synthetic dataset to disk and drives the ``ecivariants``
command through ingest, compute, rankings, sweep and baseline. All outputs go
to a temporary directory and carry a provenance header.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from ecivariants import synthetic, trade_data

root = Path(tempfile.mkdtemp(prefix="ecivariants-"))
years = (2000, 2001, 2002)
exports = synthetic.synthetic_exports(40, 150, years=years, seed=2)
panel = synthetic.planted_panel(exports, years, seed=2)
with open(root / "exports.csv", "w", newline="") as fh:
    trade_data.write_exports(exports.values(), fh)
with open(root / "macro.csv", "w", newline="") as fh:
    trade_data.write_macro(panel, fh)
(root / "sweep.cfg").write_text("exports = %s\nmacro = %s\nyears = 2000:2002\nfractions = 0.9,0.8\n"
                                % (root / "exports.csv", root / "macro.csv"))


def ecivariants(*args):
    cmd = [sys.executable, "-m", "ecivariants", *map(str, args)]
    print("$ ecivariants " + " ".join(map(str, args)))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout + proc.stderr, end="")
    print("(exit %d)\n" % proc.returncode)


out = root / "out"
ecivariants("ingest", "--exports", root / "exports.csv", "--macro", root / "macro.csv", "--out", out / "ingest")
ecivariants("compute", "--exports", root / "exports.csv", "--variant", 729, "--year", 2000, "--out", out)
ecivariants("rankings", "--exports", root / "exports.csv", "--variant", 545, "--year", 2000, "--top", 5,
            "--bottom", 5, "--out", out)
ecivariants("sweep", "--config", root / "sweep.cfg", "--out", out / "sweep")
ecivariants("baseline", "--trials", 1000, "--seed", 1, "--out", out)
ecivariants("compute", "--exports", root / "exports.csv", "--variant", 730, "--year", 2000)
print("outputs in", out)
