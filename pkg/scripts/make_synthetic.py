"""Write a synthetic mixed-script corpus for benchmarking the cleaner.

    python scripts/make_synthetic.py /tmp/mix.txt --size 1e9
"""

import argparse

from naab_clean.synthetic import write_farsi_mix


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("path")
    p.add_argument("--size", type=float, default=1e8, help="target size in bytes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pool-lines", type=int, default=20000)
    args = p.parse_args()
    n = write_farsi_mix(args.path, int(args.size), seed=args.seed, pool_lines=args.pool_lines)
    print(f"wrote {n:,} bytes to {args.path}")


if __name__ == "__main__":
    main()
