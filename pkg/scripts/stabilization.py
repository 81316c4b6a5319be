"""Long-time heat evolution of Heaviside and |t|^(1/2) and their stabilization limits.

Usage: python scripts/stabilization.py
"""
from asymptoscope import tauberian as TB
from asymptoscope import transform as T


def main():
    for f in (T.heaviside(), T.homogeneous(0.5)):
        rep = TB.stabilization_check(f, 2, x=[0.0])
        print(f"{f.label}: stabilizes={rep.stabilizes}  T(t) = t^{rep.T_power:g}  "
              f"ell = {[round(complex(v).real, 8) for v in rep.ell]}")


if __name__ == "__main__":
    main()
