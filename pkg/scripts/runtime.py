"""Online versus high-fidelity runtimes on viscous Burgers.

    python3 scripts/runtime.py [config] [--n-train 500] [--n-test 200]
"""
import argparse
import sys
from pathlib import Path

from wassrom.experiment import cli

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config", nargs="?", type=Path,
                   default=ROOT / "configs" / "viscous_burgers.ini")
    p.add_argument("--n-train")
    p.add_argument("--n-test")
    p.add_argument("--output")
    args = p.parse_args(argv)
    extra = []
    for flag, v in (("--n-train", args.n_train), ("--n-test", args.n_test),
                    ("--output", args.output)):
        if v:
            extra += [flag, v]
    return cli.main(["runtime", str(args.config), *extra])


if __name__ == "__main__":
    sys.exit(main())
