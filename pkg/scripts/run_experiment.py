"""Run one experiment kind with its example config.

Usage: python scripts/run_experiment.py {solve,farfield,betti,stability,corner,verify} [--out DIR] [--threads N]
"""

import argparse
import sys
from pathlib import Path

from elastoscat.cli import run

ROOT = Path(__file__).resolve().parents[1]
COMMAND = {"solve": "solve", "farfield": "farfield", "betti": "betti-check", "stability": "stability-exp", "corner": "corner-exp", "verify": "verify"}

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=sorted(COMMAND))
    ap.add_argument("--out", default=None)
    ap.add_argument("--threads", default="1")
    a = ap.parse_args()
    out = a.out or str(ROOT / "out" / a.kind)
    sys.exit(run([COMMAND[a.kind], "--config", str(ROOT / "configs" / f"{a.kind}.toml"), "--out", out, "--threads", a.threads]))
