"""Run every scenario at its defaults, then every file in configs/.

Outputs land in results/defaults/ and results/configs/. The exit status is
the worst exit code of the batch runs.
"""

import argparse
import sys
from pathlib import Path

from chanopt.cli import main

ROOT = Path(__file__).resolve().parent.parent


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default=str(ROOT / "results"))
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--format", choices=["csv", "json"], help="override every config")
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    common = ["--jobs", str(args.jobs)] + (["--format", args.format] if args.format else [])
    codes = [main(["batch", "--out-dir", str(out / "defaults"), *common])]
    configs = sorted(str(p) for p in (ROOT / "configs").glob("*.yaml"))
    if configs:
        codes.append(main(["batch", *configs, "--out-dir", str(out / "configs"), *common]))
    return max(codes)


if __name__ == "__main__":
    sys.exit(run())
