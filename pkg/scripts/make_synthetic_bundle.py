"""Write the default synthetic bundle (or a resized one) to disk.

    python3 scripts/make_synthetic_bundle.py out/bundle --cols 20 --rows 10
"""

import argparse

from vprbench.synthetic import SyntheticConfig, generate, write_bundle


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out")
    p.add_argument("--seed", type=int, default=SyntheticConfig.seed)
    p.add_argument("--cols", type=int, default=SyntheticConfig.cols)
    p.add_argument("--rows", type=int, default=SyntheticConfig.rows)
    p.add_argument("--n-training", type=int, default=SyntheticConfig.n_training)
    a = p.parse_args()
    cfg = SyntheticConfig(seed=a.seed, cols=a.cols, rows=a.rows, n_training=a.n_training)
    path = write_bundle(generate(cfg), a.out)
    print(f"{cfg.n_reference} reference frames -> {path}")


if __name__ == "__main__":
    main()
