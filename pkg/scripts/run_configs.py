"""Run every YAML config in a directory and tabulate the exit statuses.

    python3 scripts/run_configs.py [--configs configs] [--output results]
"""

import argparse
import json
import time
from pathlib import Path

from kgspectral.config import load_config
from kgspectral.experiments import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configs", default="configs")
    ap.add_argument("--output", default="results")
    ap.add_argument("--only", nargs="*", help="config stems to run (default: all)")
    args = ap.parse_args()

    paths = sorted(Path(args.configs).glob("*.yaml"))
    if args.only:
        paths = [p for p in paths if p.stem in args.only]
    worst = 0
    for path in paths:
        cfg = load_config(path)
        out = Path(args.output) / path.stem
        start = time.perf_counter()
        status = run(cfg, out)
        elapsed = time.perf_counter() - start
        result = json.loads((out / "summary.json").read_text())["result"]
        print(f"{path.stem:24s} status={status} pass={result.get('pass')} ({elapsed:.1f} s) -> {out}")
        worst = max(worst, status)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
