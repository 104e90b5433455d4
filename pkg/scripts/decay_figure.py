"""Singular value and training error decay of PCA vs tPCA, printed as a table.

    python3 scripts/decay_figure.py [family] [--n-train 1000] [--seed 21]
"""
import argparse

import numpy as np

from wassrom.pca import pca_fit
from wassrom.snapshots import FAMILY_NAMES, make_family, sample_training_set
from wassrom.tpca import tpca_fit


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("family", nargs="?", default="burgers_inviscid", choices=FAMILY_NAMES)
    p.add_argument("--n-train", type=int, default=1000)
    p.add_argument("--seed", type=int, default=21)
    args = p.parse_args(argv)
    train = sample_training_set(make_family(args.family), args.n_train, args.seed)
    pca, tpca = pca_fit(train), tpca_fit(train)
    print(f"{'n':>4} {'pca_sigma':>12} {'pca_err':>12} {'tpca_sigma':>12} {'tpca_err':>12}")
    for n in (1, 2, 3, 5, 10, 15, 20, 30, 50):
        print(f"{n:4d} {pca.sigma[n - 1]:12.4e} {np.sqrt(pca.tail(n)):12.4e} "
              f"{tpca.sigma[n - 1]:12.4e} {np.sqrt(tpca.tail(n)):12.4e}")


if __name__ == "__main__":
    main()
