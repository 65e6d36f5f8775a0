"""Conditional Zipf-Mandelbrot exceedances against the matching GZD, over thresholds."""
import argparse

from discrete_extremes.replication import theorem1_ratio_check


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--s", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    p.add_argument("--k-max", type=int, default=10)
    args = p.parse_args(argv)
    print("s,u,max_relative_deviation")
    for s in args.s:
        for e in range(1, 7):
            print(f"{s},{10**e},{theorem1_ratio_check(s, 10**e, args.k_max):.3e}")


if __name__ == "__main__":
    main()
