"""Binary vs float preset comparison on one query split, repeated over seeds.

    python3 scripts/run_tradeoff.py out/bundle out/tradeoff --seeds 0 1 2
"""

import argparse
import json
import logging
from dataclasses import asdict
from pathlib import Path

from vprbench.experiments import tradeoff


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("bundle", help="bundle directory written by make_synthetic_bundle.py")
    p.add_argument("out")
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--split", default="t15")
    a = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    runs = tradeoff(a.bundle, a.out, seeds=a.seeds, split=a.split)
    for r in runs:
        print(f"seed {r.seed}: binary {r.binary_t_total * 1e3:7.1f} ms  AUC {r.binary_auc:.3f} | "
              f"float {r.float_t_total * 1e3:7.1f} ms  AUC {r.float_auc:.3f} | "
              f"{'holds' if r.holds else 'does not hold'}")
    summary = [dict(asdict(r), holds=r.holds) for r in runs]
    Path(a.out, "tradeoff.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
