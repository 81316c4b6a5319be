"""Desingularized pairings against direct pairings on a small distribution corpus.

Usage: python scripts/reconstruction_round_trip.py
"""
import numpy as np
from scipy import special

from asymptoscope import transform as T
from asymptoscope.kernels import KernelSpec, calibration_constant, get_kernel, make_reconstruction_wavelet


def shifted(kernel, a, label):
    return KernelSpec(lambda u: kernel(u) * np.exp(-1j * a * np.asarray(u)), label, "all",
                      moment_window=kernel.moment_window)


def bump(u):
    u = np.asarray(u, dtype=float)
    core = np.exp(-u * u - 1.0 / np.maximum(u * u, 1e-300)) * (u != 0)
    return (core * (1 + 0.5 * np.sign(u))).astype(complex)


def main():
    psi = get_kernel("lizorkin_exp")
    eta = make_reconstruction_wavelet(psi)
    tests = [shifted(get_kernel("lizorkin_exp"), 0.4, "rho_a"),
             shifted(get_kernel("shifted_lizorkin:0.5"), -0.3, "rho_b"),
             shifted(KernelSpec(bump, "bump", "all"), 0.9, "rho_c")]
    tt = np.arange(64) * 0.1
    corpus = [T.cosine(1.3), T.weierstrass(0.6), T.riemann_w(),
              T.SampledSignal(np.cos(tt) + 0.3 * np.sin(3 * tt), 0.1, label="sampled"),
              T.homogeneous(0.5), T.heaviside()]
    for f in corpus:
        for rho in tests:
            got = T.desingularize(f, psi, eta, rho).value[0]
            ref = T.direct_pairing(f, rho)[0]
            print(f"{f.label:>18} {rho.label:>6}  |pairing| {abs(ref):.4e}  rel error {abs(got - ref) / abs(ref):.2e}")
    c = calibration_constant(psi, psi, 1)
    print(f"c_psi_psi {c.real:.10f}, 2 K0(4) = {2 * special.k0(4.0):.10f}")


if __name__ == "__main__":
    main()
