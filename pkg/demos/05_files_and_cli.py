"""Write a problem to disk and solve it with the command-line tool.

The same thing from a shell:

    bbcs solve --matrix A.json --obs b.bin --lambda auto:0.1 --out report.json
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from bbcs import fileio, harness
from bbcs.harness import SignalSpec
from bbcs.operators import make_rng

work = Path(tempfile.mkdtemp())
rng = make_rng(3)
x = harness.gen_sparse_signal(SignalSpec(n=2048, k=32), rng)
op = harness.make_operator("partial-dct", 512, 2048, rng)
fileio.save_operator(work / "A.json", op)  # only the row indices are stored
fileio.save_vector(work / "b.bin", harness.observe(op, x, 1e-4, rng))

cmd = [sys.executable, "-m", "bbcs", "solve", "--matrix", str(work / "A.json"),
       "--obs", str(work / "b.bin"), "--out", str(work / "report.json"),
       "--x-out", str(work / "x.csv")]
out = subprocess.run(cmd, capture_output=True, text=True, check=True)
print(json.dumps(json.loads(out.stdout), indent=2))

report = fileio.load_report(work / "report.json")
print(f"{len(report.gap_history)} gap values recorded, last {report.gap_history[-1]:.1e}")

# a bad input exits nonzero with a JSON error on stderr
bad = subprocess.run([sys.executable, "-m", "bbcs", "solve", "--matrix", "gen:dct:16:64",
                      "--obs", str(work / "b.bin")], capture_output=True, text=True)
print("exit", bad.returncode, bad.stderr.strip())
