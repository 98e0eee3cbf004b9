# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Same call signatures and semantics as :mod:`mgfnorm._fallback`; the selector
in :mod:`mgfnorm.kernels` picks one of the two at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, sqrt, fabs, isfinite, INFINITY

cnp.import_array()


cdef inline void _kadd(double* s, double* c, double x) noexcept nogil:
    # Neumaier compensated summation
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def pair_expm1_sum(const double[:, ::1] y, double c):
    """Sum of ``expm1(c * ||y_i + y_j||^2)`` over all ordered pairs."""
    cdef Py_ssize_t n = y.shape[0], d = y.shape[1], i, j, k
    cdef double off_s = 0.0, off_c = 0.0, dia_s = 0.0, dia_c = 0.0
    cdef double row, q, u
    with nogil:
        for i in range(n):
            q = 0.0
            for k in range(d):
                q = q + y[i, k] * y[i, k]
            _kadd(&dia_s, &dia_c, expm1(4.0 * c * q))
            row = 0.0
            for j in range(i + 1, n):
                q = 0.0
                for k in range(d):
                    u = y[i, k] + y[j, k]
                    q = q + u * u
                row = row + expm1(c * q)
            _kadd(&off_s, &off_c, row)
    return 2.0 * (off_s + off_c) + (dia_s + dia_c)


def pair_gauss_sum(const double[:, ::1] y, double c):
    """Sum of ``exp(-c * ||y_i - y_j||^2)`` over all ordered pairs."""
    cdef Py_ssize_t n = y.shape[0], d = y.shape[1], i, j, k
    cdef double s = 0.0, comp = 0.0, row, q, u
    with nogil:
        for i in range(n):
            row = 0.0
            for j in range(i + 1, n):
                q = 0.0
                for k in range(d):
                    u = y[i, k] - y[j, k]
                    q = q + u * u
                row = row + exp(-c * q)
            _kadd(&s, &comp, row)
    return 2.0 * (s + comp) + <double>n


cdef inline void _sigma2_step(Py_ssize_t j, Py_ssize_t d,
                              const double[:, ::1] x, double[:, ::1] s2,
                              const double[::1] b, const double[:, :, ::1] B,
                              const double[:, :, ::1] G, const double[::1] s0,
                              double* out) noexcept nogil:
    cdef Py_ssize_t p = B.shape[0], q = G.shape[0], k, r, l, m
    cdef double acc, v
    for r in range(d):
        acc = b[r]
        for k in range(p):
            m = j - 1 - k
            if m >= 0:
                for l in range(d):
                    v = x[m, l]
                    acc = acc + B[k, r, l] * v * v
        for k in range(q):
            m = j - 1 - k
            for l in range(d):
                if m >= 0:
                    acc = acc + G[k, r, l] * s2[m, l]
                else:
                    acc = acc + G[k, r, l] * s0[l]
        out[r] = acc


def ccc_filter(const double[:, ::1] x, const double[::1] b,
               const double[:, :, ::1] B, const double[:, :, ::1] G,
               const double[::1] s0):
    """Conditional variances ``sigma^2_j`` (rows) of a CCC-GARCH recursion.

    Presample observations are zero and presample variances equal ``s0``.
    """
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], j, r
    out = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] s2 = out
    cdef double[::1] tmp = np.empty(d, dtype=np.float64)
    with nogil:
        for j in range(n):
            _sigma2_step(j, d, x, s2, b, B, G, s0, &tmp[0])
            for r in range(d):
                s2[j, r] = tmp[r]
    return out


def ccc_negloglik(const double[:, ::1] x, const double[::1] b,
                  const double[:, :, ::1] B, const double[:, :, ::1] G,
                  const double[::1] s0, const double[:, ::1] Rinv,
                  double logdet_r):
    """Sum over j of ``x_j' Sigma_j^{-1} x_j + log|Sigma_j|``; ``inf`` if invalid."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], j, r, l
    s2_arr = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] s2 = s2_arr
    cdef double[::1] z = np.empty(d, dtype=np.float64)
    cdef double[::1] tmp = np.empty(d, dtype=np.float64)
    cdef double total = 0.0, quad, logdet, v
    cdef bint bad = False
    with nogil:
        for j in range(n):
            _sigma2_step(j, d, x, s2, b, B, G, s0, &tmp[0])
            logdet = logdet_r
            for r in range(d):
                v = tmp[r]
                if not (v > 0.0) or not isfinite(v) or v > 1e250:
                    bad = True
                    break
                s2[j, r] = v
                logdet = logdet + log(v)
                z[r] = x[j, r] / sqrt(v)
            if bad:
                break
            quad = 0.0
            for r in range(d):
                for l in range(d):
                    quad = quad + z[r] * Rinv[r, l] * z[l]
            total = total + quad + logdet
    if bad or not isfinite(total):
        return INFINITY
    return total


cdef void _jacobi_sqrt(Py_ssize_t d, double* a, double* v, double* w,
                       double* out) noexcept nogil:
    # symmetric square root of the d x d matrix in ``a`` (destroyed)
    cdef Py_ssize_t i, j, k, p, q, sweep
    cdef double off, theta, t, cs, sn, apq, app, aqq, akp, akq, vkp, vkq, tau, nrm
    for i in range(d):
        for j in range(d):
            v[i * d + j] = 1.0 if i == j else 0.0
    for sweep in range(100):
        off = 0.0
        nrm = 0.0
        for i in range(d):
            for j in range(d):
                if i != j:
                    off = off + a[i * d + j] * a[i * d + j]
                nrm = nrm + a[i * d + j] * a[i * d + j]
        if off <= 1e-30 * nrm:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p * d + q]
                if apq == 0.0:
                    continue
                app = a[p * d + p]
                aqq = a[q * d + q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                cs = 1.0 / sqrt(1.0 + t * t)
                sn = t * cs
                tau = sn / (1.0 + cs)
                a[p * d + p] = app - t * apq
                a[q * d + q] = aqq + t * apq
                a[p * d + q] = 0.0
                a[q * d + p] = 0.0
                for k in range(d):
                    if k != p and k != q:
                        akp = a[k * d + p]
                        akq = a[k * d + q]
                        a[k * d + p] = akp - sn * (akq + tau * akp)
                        a[k * d + q] = akq + sn * (akp - tau * akq)
                        a[p * d + k] = a[k * d + p]
                        a[q * d + k] = a[k * d + q]
                for k in range(d):
                    vkp = v[k * d + p]
                    vkq = v[k * d + q]
                    v[k * d + p] = vkp - sn * (vkq + tau * vkp)
                    v[k * d + q] = vkq + sn * (vkp - tau * vkq)
    for i in range(d):
        w[i] = sqrt(a[i * d + i]) if a[i * d + i] > 0.0 else 0.0
    for i in range(d):
        for j in range(d):
            t = 0.0
            for k in range(d):
                t = t + v[i * d + k] * w[k] * v[j * d + k]
            out[i * d + j] = t


def sym_sqrt_small(const double[:, ::1] m):
    """Symmetric square root of a small SPD matrix by cyclic Jacobi sweeps."""
    cdef Py_ssize_t d = m.shape[0], i, j
    a = np.ascontiguousarray(m, dtype=np.float64).copy()
    v = np.empty((d, d)); w = np.empty(d); out = np.empty((d, d))
    cdef double[:, ::1] av = a, vv = v, ov = out
    cdef double[::1] wv = w
    _jacobi_sqrt(d, &av[0, 0], &vv[0, 0], &wv[0], &ov[0, 0])
    return out


def ccc_simulate(const double[:, ::1] eps, const double[::1] b,
                 const double[:, :, ::1] B, const double[:, :, ::1] G,
                 const double[:, ::1] R, const double[::1] s0,
                 double explode):
    """Simulate ``x_j = Sigma_j^{1/2} eps_j`` with the symmetric root.

    Returns ``(x, sigma2, status)``; ``status`` is the first row index whose
    variance exceeded ``explode`` or ``-1`` when none did.
    """
    cdef Py_ssize_t n = eps.shape[0], d = eps.shape[1], j, r, l
    x_arr = np.zeros((n, d), dtype=np.float64)
    s2_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] x = x_arr, s2 = s2_arr
    cdef double[::1] tmp = np.empty(d), sd = np.empty(d), w = np.empty(d)
    cdef double[:, ::1] a = np.empty((d, d)), v = np.empty((d, d)), root = np.empty((d, d))
    cdef Py_ssize_t status = -1
    cdef double acc
    with nogil:
        for j in range(n):
            _sigma2_step(j, d, x, s2, b, B, G, s0, &tmp[0])
            for r in range(d):
                if not (tmp[r] <= explode) or not (tmp[r] > 0.0):
                    status = j
                    break
                s2[j, r] = tmp[r]
                sd[r] = sqrt(tmp[r])
            if status >= 0:
                break
            for r in range(d):
                for l in range(d):
                    a[r, l] = sd[r] * R[r, l] * sd[l]
            _jacobi_sqrt(d, &a[0, 0], &v[0, 0], &w[0], &root[0, 0])
            for r in range(d):
                acc = 0.0
                for l in range(d):
                    acc = acc + root[r, l] * eps[j, l]
                x[j, r] = acc
    return x_arr, s2_arr, status


def ccc_negloglik_grad(const double[:, ::1] x, const double[::1] b,
                       const double[:, :, ::1] B, const double[:, :, ::1] G,
                       const double[::1] s0, const double[:, ::1] Rinv,
                       double logdet_r):
    """Value of :func:`ccc_negloglik` and its gradient.

    Returns ``(value, gb, gB, gG, zz)`` where ``zz = sum_j z_j z_j'`` for the
    devolatilised ``z_j = D_j^{-1} x_j``; the caller turns ``zz`` into the
    derivative with respect to ``R``.  Gradients come from a reverse (adjoint)
    pass through the variance recursion.  ``value`` is ``inf`` when invalid.
    """
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], p = B.shape[0], q = G.shape[0]
    cdef Py_ssize_t j, r, l, k, m
    s2_arr = np.empty((n, d), dtype=np.float64)
    lam_arr = np.zeros((n, d), dtype=np.float64)
    gb_arr = np.zeros(d); gB_arr = np.zeros((p, d, d)); gG_arr = np.zeros((q, d, d))
    zz_arr = np.zeros((d, d))
    cdef double[:, ::1] s2 = s2_arr, lam = lam_arr, zz = zz_arr
    cdef double[::1] gb = gb_arr
    cdef double[:, :, ::1] gB = gB_arr, gG = gG_arr
    cdef double[::1] z = np.empty(d), rz = np.empty(d), tmp = np.empty(d)
    cdef double total = 0.0, logdet, v, acc, xv
    cdef bint bad = False
    with nogil:
        for j in range(n):
            _sigma2_step(j, d, x, s2, b, B, G, s0, &tmp[0])
            logdet = logdet_r
            for r in range(d):
                v = tmp[r]
                if not (v > 0.0) or not isfinite(v) or v > 1e250:
                    bad = True
                    break
                s2[j, r] = v
                logdet = logdet + log(v)
                z[r] = x[j, r] / sqrt(v)
            if bad:
                break
            for r in range(d):
                acc = 0.0
                for l in range(d):
                    acc = acc + Rinv[r, l] * z[l]
                rz[r] = acc
            acc = 0.0
            for r in range(d):
                acc = acc + z[r] * rz[r]
                # direct derivative of l_j with respect to sigma^2_{j,r}
                lam[j, r] = (1.0 - z[r] * rz[r]) / s2[j, r]
                for l in range(d):
                    zz[r, l] = zz[r, l] + z[r] * z[l]
            total = total + acc + logdet
        if not bad:
            # adjoint: lam_j += sum_k Gamma_k' lam_{j+k}
            for j in range(n - 1, -1, -1):
                for k in range(q):
                    m = j + 1 + k
                    if m < n:
                        for l in range(d):
                            acc = 0.0
                            for r in range(d):
                                acc = acc + G[k, r, l] * lam[m, r]
                            lam[j, l] = lam[j, l] + acc
            for j in range(n):
                for r in range(d):
                    gb[r] = gb[r] + lam[j, r]
                    for k in range(p):
                        m = j - 1 - k
                        if m >= 0:
                            for l in range(d):
                                xv = x[m, l]
                                gB[k, r, l] = gB[k, r, l] + lam[j, r] * xv * xv
                    for k in range(q):
                        m = j - 1 - k
                        for l in range(d):
                            if m >= 0:
                                gG[k, r, l] = gG[k, r, l] + lam[j, r] * s2[m, l]
                            else:
                                gG[k, r, l] = gG[k, r, l] + lam[j, r] * s0[l]
    if bad or not isfinite(total):
        return INFINITY, gb_arr, gB_arr, gG_arr, zz_arr
    return total, gb_arr, gB_arr, gG_arr, zz_arr
