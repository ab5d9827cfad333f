"""Run the acceptance suite and print its per-criterion summary.

    python3 scripts/run_acceptance.py            # all eleven criteria
    python3 scripts/run_acceptance.py -k "not 7" # extra pytest args pass through
"""
import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parent.parent
cmd = [sys.executable, "-m", "pytest", str(root / "tests" / "test_acceptance.py"), "-v", *sys.argv[1:]]
sys.exit(subprocess.call(cmd, cwd=root))
