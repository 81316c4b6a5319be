"""Jacobi theta function as a transform of the quadratic comb, with its modular law.

Usage: python scripts/theta_identities.py [z ...]   (complex numbers with positive imaginary part)
"""
import math
import sys

import numpy as np
from scipy import special

from asymptoscope import transform as T
from asymptoscope.kernels import get_kernel


def theta(z):
    return complex(T.evaluate(T.theta_comb(), get_kernel("laplace"), [z.real], [z.imag], "phi")[0, 0])


def main(argv):
    points = [complex(s) for s in argv] or [0.3 + 0.8j, -0.45 + 1.3j, 0.1 + 0.6j]
    print(f"theta(i) = {theta(1j).real:.12f}   pi^(1/4)/Gamma(3/4) = {math.pi ** 0.25 / special.gamma(0.75):.12f}")
    for z in points:
        defect = abs(theta(-1 / z) - np.sqrt(-1j * z) * theta(z))
        print(f"z = {z}: |theta(-1/z) - sqrt(-iz) theta(z)| = {defect:.2e}")


if __name__ == "__main__":
    main(sys.argv[1:])
