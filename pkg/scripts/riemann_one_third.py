"""Per-k profile exponents and Holder exponent of Riemann's function at x0 = 1/3.

Usage: python scripts/riemann_one_third.py [--kernel hermite:16] [--s-min 1e-6]
"""
import argparse

from asymptoscope import tauberian as TB
from asymptoscope import transform as T
from asymptoscope.kernels import get_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kernel", default="hermite:16")
    ap.add_argument("--s-min", type=float, default=1e-6, help="smallest y/rho sampled on the Holder shells")
    args = ap.parse_args()

    f, kernel = T.riemann_w(), get_kernel(args.kernel)
    weak = TB.estimate_weak_exponent(f, kernel, 1 / 3)
    for d in weak.per_k:
        tag = "faster than any power, lower bound" if d["rapid"] else "power law"
        print(f"k={d['k']}  alpha_k={d['alpha']:.2f}  ({tag})")
    hol = TB.holder_exponent(f, kernel, 1 / 3, weak=weak, s_min=args.s_min)
    print(f"holder exponent {hol.holder_alpha:.3f}, classification {hol.classification}")


if __name__ == "__main__":
    main()
