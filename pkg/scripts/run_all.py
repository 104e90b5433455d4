"""Run every experiment config end to end and print the threshold tables.

    python3 scripts/run_all.py [configs/*.ini] [--output-root runs]

Each config goes through generate, fit, evaluate, then sweep / runtime when
it asks for them, then report.  Exit status is nonzero if any report fails.
"""
import argparse
import os
import sys
from pathlib import Path

from wassrom.experiment import cli
from wassrom.experiment.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def stages(cfg):
    out = ["generate", "fit", "evaluate"]
    keys = " ".join(cfg.thresholds)
    if "sweep." in keys:
        out.append("sweep")
    if "runtime." in keys:
        out.append("runtime")
    return out + ["report"]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("configs", nargs="*", type=Path)
    p.add_argument("--output-root", type=Path)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)
    if args.output_root:
        os.environ["WASSROM_OUTPUT_ROOT"] = str(args.output_root)
    configs = args.configs or sorted((ROOT / "configs").glob("*.ini"))
    status = {}
    for path in configs:
        cfg = load_config(path)
        print(f"== {path.name}")
        code = 0
        for stage in stages(cfg):
            code = cli.main([stage, str(path), "--workers", str(args.workers)])
            if code == 2:
                break
        status[path.name] = code
    print()
    for name, code in status.items():
        print(f"{'ok  ' if code == 0 else 'FAIL'} {name}")
    return int(any(status.values()))


if __name__ == "__main__":
    sys.exit(main())
