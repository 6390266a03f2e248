"""Mean search time against a 200-image and a 2000-image map, same queries."""

import argparse

from vprbench.experiments import map_scaling
from vprbench.synthetic import SyntheticConfig


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--cols", type=int, default=50)
    p.add_argument("--rows", type=int, default=40)
    p.add_argument("--small", type=int, default=200)
    p.add_argument("--queries", type=int, default=40)
    p.add_argument("--k", type=int, default=256)
    a = p.parse_args()
    r = map_scaling(SyntheticConfig(cols=a.cols, rows=a.rows, n_training=40),
                    small_size=a.small, n_queries=a.queries, k=a.k)
    print(f"{r.small_size:5d} images: mean t_search {r.small_t_search * 1e3:8.2f} ms")
    print(f"{r.large_size:5d} images: mean t_search {r.large_t_search * 1e3:8.2f} ms")


if __name__ == "__main__":
    main()
