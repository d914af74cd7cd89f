"""NumPy reference implementation of the grid-evaluation kernels.

These two routines are the hot inner loops of the package: every torus
quadrature, certification grid and hermitian-cloud sweep reduces to them.
The compiled module ``_core`` implements the same contracts; this module is
the fallback and the parity oracle for it.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi

IMPL = "numpy"

# block size keeps the (terms x points) intermediate below ~32 MB
_BLOCK = 1 << 18


def exp_sums(freqs, coeffs, theta, x=None):
    """Evaluate f(t_j) = sum_k c_k exp(<freq_k, x_j> + 2*pi*i*<freq_k, theta_j>).

    freqs: (K, r) float64 (integral exponent vectors), coeffs: (K,) complex,
    theta: (M, r) float64, x: (M, r) float64 or None (compact torus).
    Returns (M,) complex128.
    """
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    m = theta.shape[0]
    out = np.empty(m, dtype=np.complex128)
    k = max(1, freqs.shape[0])
    step = max(1, _BLOCK // k)
    for lo in range(0, m, step):
        hi = min(lo + step, m)
        phase = TWO_PI * (theta[lo:hi] @ freqs.T)
        z = np.exp(1j * phase)
        if x is not None:
            z *= np.exp(x[lo:hi] @ freqs.T)
        out[lo:hi] = z @ coeffs
    return out


def macdonald_grid(alphas, theta, pinv):
    """Unnormalized Macdonald density prod_a |1-t^a|^2 / |1-pinv*t^a|^2.

    alphas: (P, r) float64 positive-root exponent vectors of the dual group,
    theta: (M, r) float64 compact-torus coordinates, pinv: 1/p (0.0 for the
    Sato-Tate limit).  Returns (M,) float64, >= 0.
    """
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    m = theta.shape[0]
    out = np.empty(m, dtype=np.float64)
    k = max(1, alphas.shape[0])
    step = max(1, _BLOCK // k)
    for lo in range(0, m, step):
        hi = min(lo + step, m)
        w = np.exp(1j * TWO_PI * (theta[lo:hi] @ alphas.T))
        num = np.abs(1.0 - w) ** 2
        if pinv != 0.0:
            num /= np.abs(1.0 - pinv * w) ** 2
        out[lo:hi] = np.prod(num, axis=1)
    return out
