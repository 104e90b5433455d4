"""Command line driver.

    wassrom <subcommand> CONFIG [overrides]

Subcommands: generate, fit, evaluate, sweep, runtime, report.  The archive
goes to ``--output``, else the config's ``output`` key, else
``$WASSROM_OUTPUT_ROOT/<name>`` (default root ``./runs``).  The exit code is
0 only if every threshold evaluated by the subcommand passes; ``report``
requires all configured thresholds to be available.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import ConfigError
from . import runner
from .config import load_config

log = logging.getLogger("wassrom")


def _ints(s):
    return tuple(int(p) for p in s.split(",") if p.strip())


def _strs(s):
    return tuple(p.strip() for p in s.split(",") if p.strip())


def build_parser():
    p = argparse.ArgumentParser(prog="wassrom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("generate", "sample and archive training/test snapshots"),
                        ("fit", "fit PCA, tPCA and gBar on the archived training set"),
                        ("evaluate", "test-set error tables, reconstructions and plots"),
                        ("sweep", "training-set-size sweep"),
                        ("runtime", "online vs high-fidelity runtime ratios"),
                        ("report", "check every configured threshold against the archive")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", type=Path)
        s.add_argument("--output", type=Path)
        s.add_argument("--family")
        s.add_argument("--n-train", type=int)
        s.add_argument("--train-seed", type=int)
        s.add_argument("--n-test", type=int)
        s.add_argument("--test-seed", type=int)
        s.add_argument("--n-quad", type=int)
        s.add_argument("--n-cells", type=int)
        s.add_argument("--ranks", type=_ints)
        s.add_argument("--metrics", type=_strs)
        s.add_argument("--models", type=_strs)
        s.add_argument("--n-max", type=int)
        s.add_argument("--policy", choices=("rearrange", "reject"))
        s.add_argument("--fem-h", type=float)
        s.add_argument("--workers", type=int)
        s.add_argument("--interp-policy", choices=("knn", "ball"))
        s.add_argument("--interp-r", type=int)
        s.add_argument("--interp-tau", type=float)
        s.add_argument("--sweep-sizes", type=_ints)
        s.add_argument("--sweep-realizations", type=int)
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args):
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        output=str(args.output) if args.output else None, family=args.family,
        n_train=args.n_train, train_seed=args.train_seed, n_test=args.n_test,
        test_seed=args.test_seed, n_quad=args.n_quad, n_cells=args.n_cells, ranks=args.ranks,
        metrics=args.metrics, models=args.models, n_max=args.n_max, policy=args.policy,
        fem_h=args.fem_h, workers=args.workers)
    it = {k: v for k, v in (("policy", args.interp_policy), ("r", args.interp_r),
                            ("tau", args.interp_tau)) if v is not None}
    if it:
        cfg = replace(cfg, interp=replace(cfg.interp, **it))
    sw = {k: v for k, v in (("sizes", args.sweep_sizes),
                            ("realizations", args.sweep_realizations)) if v is not None}
    if sw:
        cfg = replace(cfg, sweep=replace(cfg.sweep, **sw))
    return cfg


def _finish(cfg, out, quantities, require_all=False):
    rows = runner.check_thresholds(cfg, quantities, require_all)
    ok = runner.write_threshold_report(cfg, out, rows)
    for key, v, op, lim, status in rows:
        shown = f"{v:.4g}" if isinstance(v, float) else v
        print(f"[{status.upper():7s}] {key} = {shown}  (want {op} {lim})")
    return 0 if ok else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = runner.output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    cmd = args.command
    if cmd == "generate":
        train, test = runner.generate(cfg, out)
        print(f"archived {len(train)} training and {len(test) if test else 0} test snapshots "
              f"under {out / 'snapshots'}")
    elif cmd == "fit":
        train, _ = runner.load_or_generate(cfg, out)
        runner.fit(cfg, train, out)
        print(f"models written to {out / 'models'}")
    elif cmd == "evaluate":
        train, test = runner.load_or_generate(cfg, out)
        try:
            suite = runner.load_suite(cfg, out)
        except FileNotFoundError:
            suite = runner.fit(cfg, train, out)
        runner.evaluate(cfg, suite, test, out)
        print(f"errors written to {out / 'errors.csv'}")
    elif cmd == "sweep":
        path, _ = runner.run_size_sweep(cfg, out)
        print(f"sweep written to {path}")
    elif cmd == "runtime":
        try:
            path, _ = runner.runtime_report(cfg, out)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        print(f"runtimes written to {path}")
    q_path = out / "quantities.json"
    quantities = json.loads(q_path.read_text()) if q_path.exists() else {}
    return _finish(cfg, out, quantities, require_all=(cmd == "report"))


if __name__ == "__main__":
    sys.exit(main())
