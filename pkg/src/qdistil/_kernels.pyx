# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels; the arithmetic mirrors qdistil._kernels_py step
for step so both backends agree to rounding."""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

WHITEN_OK = 0
WHITEN_SINGULAR_MARGINAL = 1
WHITEN_NO_CONVERGENCE = 2

cdef int STALL_WINDOW = 256
cdef double STALL_FACTOR = 0.85


cdef inline double _cabs2(double complex z) noexcept:
    return z.real * z.real + z.imag * z.imag


cdef void _inv_sqrt_2x2(double m00, double complex m01, double m11,
                        double complex* w) noexcept:
    cdef double det = m00 * m11 - _cabs2(m01)
    cdef double s = sqrt(det if det > 0.0 else 0.0)
    cdef double tau = sqrt(m00 + m11 + 2.0 * s)
    cdef double denom = s * tau
    w[0] = (m11 + s) / denom
    w[1] = -m01 / denom
    w[2] = -(m01.conjugate()) / denom
    w[3] = (m00 + s) / denom


def whiten_loop(rho, double tol=1e-13, int max_iter=10000):
    """See qdistil._kernels_py.whiten_loop."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] sig = np.array(rho, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] fa = np.eye(2, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] fb = np.eye(2, dtype=np.complex128)
    cdef double complex[:, :] s4 = sig
    cdef double complex[:, :] fam = fa
    cdef double complex[:, :] fbm = fb
    cdef double complex wa[4]
    cdef double complex wb[4]
    cdef double complex w16[16]
    cdef double complex tmp[16]
    cdef double complex acc
    cdef double complex na0, na1, nb0, nb1
    cdef double ma00, ma11, mb00, mb11, dev, d, deta, detb
    cdef double eig_min_a, eig_min_b, prev_dev, tr, nrm
    cdef double complex ma01, mb01
    cdef int it = 0
    cdef int i, j, k, l

    prev_dev = np.inf
    while it < max_iter:
        ma00 = (s4[0, 0] + s4[1, 1]).real
        ma01 = s4[0, 2] + s4[1, 3]
        ma11 = (s4[2, 2] + s4[3, 3]).real
        mb00 = (s4[0, 0] + s4[2, 2]).real
        mb01 = s4[0, 1] + s4[2, 3]
        mb11 = (s4[1, 1] + s4[3, 3]).real
        dev = 0.0
        d = ma00 - 0.5
        if d < 0: d = -d
        if d > dev: dev = d
        d = ma11 - 0.5
        if d < 0: d = -d
        if d > dev: dev = d
        d = sqrt(_cabs2(ma01))
        if d > dev: dev = d
        d = mb00 - 0.5
        if d < 0: d = -d
        if d > dev: dev = d
        d = mb11 - 0.5
        if d < 0: d = -d
        if d > dev: dev = d
        d = sqrt(_cabs2(mb01))
        if d > dev: dev = d
        if dev < tol:
            return fa, fb, it, WHITEN_OK
        if it % STALL_WINDOW == 0:
            if dev > STALL_FACTOR * prev_dev:
                return fa, fb, it, WHITEN_NO_CONVERGENCE
            prev_dev = dev
        deta = ma00 * ma11 - _cabs2(ma01)
        detb = mb00 * mb11 - _cabs2(mb01)
        d = 1.0 - 4.0 * deta
        eig_min_a = 0.5 * (1.0 - sqrt(d if d > 0.0 else 0.0))
        d = 1.0 - 4.0 * detb
        eig_min_b = 0.5 * (1.0 - sqrt(d if d > 0.0 else 0.0))
        if eig_min_a < 1e-13 or eig_min_b < 1e-13:
            return fa, fb, it, WHITEN_SINGULAR_MARGINAL
        _inv_sqrt_2x2(2.0 * ma00, 2.0 * ma01, 2.0 * ma11, wa)
        _inv_sqrt_2x2(2.0 * mb00, 2.0 * mb01, 2.0 * mb11, wb)
        # fa <- wa @ fa ; fb <- wb @ fb  (2x2)
        na0 = wa[0] * fam[0, 0] + wa[1] * fam[1, 0]
        na1 = wa[0] * fam[0, 1] + wa[1] * fam[1, 1]
        fam[1, 0] = wa[2] * fam[0, 0] + wa[3] * fam[1, 0]
        fam[1, 1] = wa[2] * fam[0, 1] + wa[3] * fam[1, 1]
        fam[0, 0] = na0
        fam[0, 1] = na1
        nb0 = wb[0] * fbm[0, 0] + wb[1] * fbm[1, 0]
        nb1 = wb[0] * fbm[0, 1] + wb[1] * fbm[1, 1]
        fbm[1, 0] = wb[2] * fbm[0, 0] + wb[3] * fbm[1, 0]
        fbm[1, 1] = wb[2] * fbm[0, 1] + wb[3] * fbm[1, 1]
        fbm[0, 0] = nb0
        fbm[0, 1] = nb1
        nrm = 0.0
        for i in range(2):
            for j in range(2):
                nrm += _cabs2(fam[i, j])
        nrm = sqrt(nrm)
        for i in range(2):
            for j in range(2):
                fam[i, j] = fam[i, j] / nrm
        nrm = 0.0
        for i in range(2):
            for j in range(2):
                nrm += _cabs2(fbm[i, j])
        nrm = sqrt(nrm)
        for i in range(2):
            for j in range(2):
                fbm[i, j] = fbm[i, j] / nrm
        # sigma <- (wa x wb) sigma (wa x wb)^dagger, renormalized
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        w16[(2 * i + j) * 4 + 2 * k + l] = wa[2 * i + k] * wb[2 * j + l]
        for i in range(4):
            for k in range(4):
                acc = 0
                for j in range(4):
                    acc = acc + w16[i * 4 + j] * s4[j, k]
                tmp[i * 4 + k] = acc
        for i in range(4):
            for k in range(4):
                acc = 0
                for j in range(4):
                    acc = acc + tmp[i * 4 + j] * (w16[k * 4 + j].conjugate())
                s4[i, k] = acc
        tr = 0.0
        for i in range(4):
            tr += s4[i, i].real
        for i in range(4):
            for k in range(4):
                s4[i, k] = s4[i, k] / tr
        it += 1
    return fa, fb, it, WHITEN_NO_CONVERGENCE


def filter_profile(cs, double r0, double r1, double absdet):
    """See qdistil._kernels_py.filter_profile."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] carr = np.ascontiguousarray(cs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros_like(carr)
    cdef double[:] cv = carr
    cdef double[:] ov = out
    cdef Py_ssize_t n = carr.shape[0]
    cdef Py_ssize_t i
    cdef double c, c1, fro2, det, gap, smax2
    for i in range(n):
        c = cv[i]
        c1 = 1.0 - c
        fro2 = c * c * r0 + c1 * c1 * r1
        det = c * c1 * absdet
        gap = fro2 * fro2 - 4.0 * det * det
        if gap < 0.0:
            gap = 0.0
        smax2 = 0.5 * (fro2 + sqrt(gap))
        if smax2 > 0.0:
            ov[i] = c * c1 / smax2
        else:
            ov[i] = 0.0
    return out
