"""Monte Carlo as an adversary, and driving everything from the shell.

The simulator shares no code with the contour formula or the window
generator, which makes it a useful third opinion. This script runs the
statistical comparison in-process, shows what a detected discrepancy
looks like, then reproduces the same checks through the command line
interface the way a batch job would.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from asep_exact import RateParams, compare, distribution_over_window, simulate

rates = RateParams.from_p(0.7)
y, nu, t = (0, 1, 2), (2, 1, 2), 0.5

print("== formula vs simulation ==")
exact = distribution_over_window(y, nu, rates, t)
result = simulate(y, nu, rates, t, trials=100_000, seed=20260821)
report = compare(result, exact.as_dict())
print(f"  trials: {result.trials}, distinct outcomes: {len(result.counts)}")
print(f"  cells checked (expected >= 25): {len(report.checked)}")
print(f"  max |z| = {report.max_abs_z:.2f}, passed = {report.passed}")

print("\n== what a wrong reference looks like ==")
corrupted = dict(exact.as_dict())
key = max(corrupted, key=corrupted.get)
corrupted[key] *= 0.8
bad = compare(result, corrupted)
print(f"  perturbed the largest cell by 20%: max |z| = {bad.max_abs_z:.1f}, "
      f"passed = {bad.passed}")

print("\n== the same thing from the shell ==")
workdir = Path(tempfile.mkdtemp())
problem = workdir / "problem.json"
problem.write_text(json.dumps({
    "p": 0.7,
    "t": 0.5,
    "Y": [0, 1, 2],
    "nu": [2, 1, 2],
    "window": [-4, 7],
}))

steps = [
    ["prob", str(problem), "--out", str(workdir / "prob.json")],
    ["oracle", str(problem), "--out", str(workdir / "oracle.json")],
    ["simulate", "--p", "0.7", "--t", "0.5", "--y", "0,1,2",
     "--nu", "2,1,2", "--trials", "20000", "--seed", "11",
     "--out", str(workdir / "sim.json")],
    ["compare", str(problem), "--trials", "20000", "--seed", "11",
     "--reference", "formula", "--out", str(workdir / "cmp.json")],
]
for argv in steps:
    proc = subprocess.run(
        [sys.executable, "-m", "asep_exact.cli", *argv],
        capture_output=True, text=True,
    )
    first = (proc.stdout or proc.stderr).strip().splitlines()[0]
    print(f"  asep-exact {argv[0]}: exit {proc.returncode}, {first}")

summary = json.loads((workdir / "cmp.json").read_text())
print(f"\n  comparison report: passed = {summary['passed']}, "
      f"max |z| = {summary['max_abs_z']:.2f}")
