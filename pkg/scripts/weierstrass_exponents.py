"""Weak scaling and Holder exponents of the Weierstrass function at a few points.

Usage: python scripts/weierstrass_exponents.py [--a 0.6] [--points 0 0.3 1.1] [--kernel lizorkin_exp]
"""
import argparse
import math

from asymptoscope import tauberian as TB
from asymptoscope import transform as T
from asymptoscope.kernels import get_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=0.6)
    ap.add_argument("--points", type=float, nargs="+", default=[0.0, 0.3, 1.1])
    ap.add_argument("--kernel", default="lizorkin_exp")
    args = ap.parse_args()

    f = T.weierstrass(args.a)
    kernel = get_kernel(args.kernel)
    exact = -math.log(args.a) / math.log(2)
    print(f"exact exponent {exact:.4f}")
    print(f"{'x0':>6} {'weak':>8} {'holder':>8}  class")
    for x0 in args.points:
        weak = TB.estimate_weak_exponent(f, kernel, x0)
        hol = TB.holder_exponent(f, kernel, x0, weak=weak)
        print(f"{x0:6.3f} {weak.alpha:8.4f} {hol.holder_alpha:8.4f}  {hol.classification}")


if __name__ == "__main__":
    main()
