"""Training-set-size sweep on inviscid Burgers (default configs/burgers.ini).

    python3 scripts/size_sweep.py [config] [--sizes 100,500] [--realizations 2]
"""
import argparse
import sys
from pathlib import Path

from wassrom.experiment import cli

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config", nargs="?", type=Path, default=ROOT / "configs" / "burgers.ini")
    p.add_argument("--sizes")
    p.add_argument("--realizations")
    p.add_argument("--output")
    args = p.parse_args(argv)
    extra = []
    for flag, v in (("--sweep-sizes", args.sizes), ("--sweep-realizations", args.realizations),
                    ("--output", args.output)):
        if v:
            extra += [flag, v]
    return cli.main(["sweep", str(args.config), *extra])


if __name__ == "__main__":
    sys.exit(main())
