# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled grid-evaluation kernels (see _numpy.py for the reference)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin

cnp.import_array()

IMPL = "cython"

DEF TWO_PI = 6.283185307179586


def exp_sums(object freqs_o, object coeffs_o, object theta_o, object x_o=None):
    """Same contract as _numpy.exp_sums."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] freqs = np.ascontiguousarray(freqs_o, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] coeffs = np.ascontiguousarray(coeffs_o, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] theta = np.ascontiguousarray(theta_o, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x
    cdef bint has_x = x_o is not None
    if has_x:
        x = np.ascontiguousarray(x_o, dtype=np.float64)
    cdef Py_ssize_t m = theta.shape[0], k = freqs.shape[0], r = theta.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=np.complex128)
    cdef Py_ssize_t j, i, d
    cdef double ph, gr, mag, acc_re, acc_im, cr, ci, er, ei
    for j in range(m):
        acc_re = 0.0
        acc_im = 0.0
        for i in range(k):
            ph = 0.0
            gr = 0.0
            for d in range(r):
                ph += freqs[i, d] * theta[j, d]
                if has_x:
                    gr += freqs[i, d] * x[j, d]
            ph *= TWO_PI
            mag = exp(gr) if has_x else 1.0
            er = mag * cos(ph)
            ei = mag * sin(ph)
            cr = coeffs[i].real
            ci = coeffs[i].imag
            acc_re += cr * er - ci * ei
            acc_im += cr * ei + ci * er
        out[j] = acc_re + 1j * acc_im
    return out


def macdonald_grid(object alphas_o, object theta_o, double pinv):
    """Same contract as _numpy.macdonald_grid."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] alphas = np.ascontiguousarray(alphas_o, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] theta = np.ascontiguousarray(theta_o, dtype=np.float64)
    cdef Py_ssize_t m = theta.shape[0], k = alphas.shape[0], r = theta.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t j, i, d
    cdef double ph, wr, wi, num, den, prod
    for j in range(m):
        prod = 1.0
        for i in range(k):
            ph = 0.0
            for d in range(r):
                ph += alphas[i, d] * theta[j, d]
            ph *= TWO_PI
            wr = cos(ph)
            wi = sin(ph)
            num = (1.0 - wr) * (1.0 - wr) + wi * wi
            if pinv != 0.0:
                den = (1.0 - pinv * wr) * (1.0 - pinv * wr) + pinv * pinv * wi * wi
                num /= den
            prod *= num
        out[j] = prod
    return out
