# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loop: push every challenge through every cell's composed
output matrices and emit quantized 24-bit response codes."""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, floor, fmod, sin, sqrt

cnp.import_array()

cdef double TWO_PI = 6.283185307179586476925286766559


def encode_responses(cnp.complex128_t[:, :, :, ::1] mats,
                     double[::1] ex2,
                     double[::1] dphi):
    """mats: (n_cells, 2, 2, 2) composed output matrices; ex2/dphi: the
    challenge observables. Returns uint32 codes (n_challenges, n_cells, 2).
    """
    cdef Py_ssize_t n = ex2.shape[0]
    cdef Py_ssize_t nc = mats.shape[0]
    out_arr = np.empty((n, nc, 2), dtype=np.uint32)
    cdef cnp.uint32_t[:, :, ::1] out = out_arr

    cdef Py_ssize_t i, j, k
    cdef double complex v0, v1, r0, r1
    cdef double m0, m1, e2, dp
    cdef double a, b
    cdef long qf, ip, fr

    for i in range(n):
        v0 = sqrt(ex2[i])
        a = sqrt(1.0 - ex2[i])
        v1 = a * cos(dphi[i]) + 1j * (a * sin(dphi[i]))
        for j in range(nc):
            for k in range(2):
                r0 = mats[j, k, 0, 0] * v0 + mats[j, k, 0, 1] * v1
                r1 = mats[j, k, 1, 0] * v0 + mats[j, k, 1, 1] * v1
                m0 = r0.real * r0.real + r0.imag * r0.imag
                m1 = r1.real * r1.real + r1.imag * r1.imag
                e2 = m0 / (m0 + m1)
                if m0 == 0.0 or m1 == 0.0:
                    dp = 0.0
                else:
                    dp = atan2(r1.imag, r1.real) - atan2(r0.imag, r0.real)
                    dp = fmod(dp, TWO_PI)
                    if dp < 0.0:
                        dp += TWO_PI
                    if dp >= TWO_PI:
                        dp = 0.0
                qf = <long>floor(e2 * 4096.0)
                if qf > 4095:
                    qf = 4095
                ip = <long>floor(dp)
                fr = <long>floor((dp - ip) * 512.0)
                if fr > 511:
                    fr = 511
                out[i, j, k] = <cnp.uint32_t>((qf << 12) | (ip << 9) | fr)
    return out_arr
