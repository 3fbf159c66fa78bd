# cython: language_level=3
"""Compiled kernels for the gradient-flow hot loop.

Cyclic Jacobi eigensolvers for small dense symmetric / Hermitian matrices, and
the two per-step field evaluations used by the flow integrator: the
root-weighted gradient field and spectrum re-snapping. Each routine has a
numpy twin in ``_fallback.py`` with the same signature and output contract.
"""
import numpy as np

from libc.math cimport fabs, sqrt

cdef extern from "complex.h" nogil:
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)
    double cabs(double complex)

cdef enum:
    MAX_SWEEPS = 60

cdef double EPS = 2.220446049250313e-16


cdef inline void _rotation(double app, double aqq, double apq,
                           double *c, double *s) noexcept nogil:
    cdef double theta = (aqq - app) / (2.0 * apq)
    cdef double t
    if fabs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c[0] = 1.0 / sqrt(1.0 + t * t)
    s[0] = t * c[0]


cdef int _jacobi_real(double[:, ::1] a, double[:, ::1] v) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k, sweep
    cdef double off, frob, apq, app, aqq, c, s, akp, akq, g
    frob = 0.0
    for p in range(n):
        for q in range(n):
            frob += a[p, q] * a[p, q]
    frob = sqrt(frob)
    for sweep in range(MAX_SWEEPS):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if sqrt(off) <= EPS * frob or off == 0.0:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                g = 100.0 * fabs(apq)
                # negligible pivot after the first sweeps: drop it
                if sweep > 3 and fabs(app) + g == fabs(app) and fabs(aqq) + g == fabs(aqq):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                _rotation(app, aqq, apq, &c, &s)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    akp = v[k, p]
                    akq = v[k, q]
                    v[k, p] = c * akp - s * akq
                    v[k, q] = s * akp + c * akq
    return -1


cdef int _jacobi_complex(double complex[:, ::1] a,
                         double complex[:, ::1] v) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k, sweep
    cdef double off, frob, r, app, aqq, c, s, g
    cdef double complex ph, cph, akp, akq
    frob = 0.0
    for p in range(n):
        for q in range(n):
            frob += creal(a[p, q]) ** 2 + cimag(a[p, q]) ** 2
    frob = sqrt(frob)
    for p in range(n):
        a[p, p] = creal(a[p, p])
    for sweep in range(MAX_SWEEPS):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += creal(a[p, q]) ** 2 + cimag(a[p, q]) ** 2
        if sqrt(off) <= EPS * frob or off == 0.0:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = cabs(a[p, q])
                if r == 0.0:
                    continue
                app = creal(a[p, p])
                aqq = creal(a[q, q])
                g = 100.0 * r
                if sweep > 3 and fabs(app) + g == fabs(app) and fabs(aqq) + g == fabs(aqq):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                # diagonal phase on index q makes the pivot real and positive
                ph = a[p, q] / r
                cph = conj(ph)
                for k in range(n):
                    if k != q:
                        a[k, q] = a[k, q] * cph
                        a[q, k] = a[q, k] * ph
                    v[k, q] = v[k, q] * cph
                _rotation(app, aqq, r, &c, &s)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = creal(a[p, p])
                a[q, q] = creal(a[q, q])
                for k in range(n):
                    akp = v[k, p]
                    akq = v[k, q]
                    v[k, p] = c * akp - s * akq
                    v[k, q] = s * akp + c * akq
    return -1


cdef void _sort_real(double[::1] w, double[:, ::1] v) noexcept nogil:
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double tmp
    for i in range(1, n):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            tmp = w[j]; w[j] = w[j - 1]; w[j - 1] = tmp
            for k in range(n):
                tmp = v[k, j]; v[k, j] = v[k, j - 1]; v[k, j - 1] = tmp
            j -= 1


cdef void _sort_complex(double[::1] w, double complex[:, ::1] v) noexcept nogil:
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double tmp
    cdef double complex ctmp
    for i in range(1, n):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            tmp = w[j]; w[j] = w[j - 1]; w[j - 1] = tmp
            for k in range(n):
                ctmp = v[k, j]; v[k, j] = v[k, j - 1]; v[k, j - 1] = ctmp
            j -= 1


def eigh_real(a):
    """Ascending eigenpairs of a real symmetric matrix (cyclic Jacobi)."""
    cdef double[:, ::1] work = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = work.shape[0]
    vec = np.eye(n, dtype=np.float64)
    val = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] vv = vec
    cdef double[::1] ww = val
    cdef Py_ssize_t i
    cdef int sweeps
    with nogil:
        sweeps = _jacobi_real(work, vv)
        for i in range(n):
            ww[i] = work[i, i]
        _sort_real(ww, vv)
    if sweeps < 0:
        raise ArithmeticError("Jacobi iteration did not converge")
    return val, vec


def eigh_complex(a):
    """Ascending eigenpairs of a complex Hermitian matrix (cyclic Jacobi)."""
    cdef double complex[:, ::1] work = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = work.shape[0]
    vec = np.eye(n, dtype=np.complex128)
    val = np.empty(n, dtype=np.float64)
    cdef double complex[:, ::1] vv = vec
    cdef double[::1] ww = val
    cdef Py_ssize_t i
    cdef int sweeps
    with nogil:
        sweeps = _jacobi_complex(work, vv)
        for i in range(n):
            ww[i] = creal(work[i, i])
        _sort_complex(ww, vv)
    if sweeps < 0:
        raise ArithmeticError("Jacobi iteration did not converge")
    return val, vec


def eigh(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return eigh_complex(a)
    return eigh_real(a)


cdef void _weighted_real(double[:, ::1] v, double[:, ::1] q, double[::1] mu,
                         double[:, ::1] tmp, double[:, ::1] qt,
                         double[:, ::1] out) noexcept nogil:
    # out = V (|mu_i - mu_j| * (V^T q V)) V^T
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + q[i, k] * v[k, j]
            tmp[i, j] = acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + v[k, i] * tmp[k, j]
            qt[i, j] = acc * fabs(mu[i] - mu[j])
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + v[i, k] * qt[k, j]
            tmp[i, j] = acc
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for k in range(n):
                acc = acc + tmp[i, k] * v[j, k]
            out[i, j] = acc
    for i in range(n):
        for j in range(i):
            out[i, j] = out[j, i]


cdef void _weighted_complex(double complex[:, ::1] v, double complex[:, ::1] q,
                            double[::1] mu, double complex[:, ::1] tmp,
                            double complex[:, ::1] qt,
                            double complex[:, ::1] out) noexcept nogil:
    # out = V (|mu_i - mu_j| * (V^H q V)) V^H, Hermitian-symmetrized
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double complex acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + q[i, k] * v[k, j]
            tmp[i, j] = acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + conj(v[k, i]) * tmp[k, j]
            qt[i, j] = acc * fabs(mu[i] - mu[j])
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + v[i, k] * qt[k, j]
            tmp[i, j] = acc
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for k in range(n):
                acc = acc + tmp[i, k] * conj(v[j, k])
            out[i, j] = acc
    for i in range(n):
        out[i, i] = creal(out[i, i])
        for j in range(i + 1, n):
            out[j, i] = conj(out[i, j])


def gradient_field(x, q, values):
    """Root-weighted gradient at state ``x``.

    ``values`` are the reference eigenvalues in ascending order; sector
    ``(i, j)`` of ``q`` in the eigenframe of ``x`` is scaled by
    ``|values[i] - values[j]|``, so equal reference values zero a sector.
    """
    cdef double[::1] mu = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = mu.shape[0]
    if np.iscomplexobj(x) or np.iscomplexobj(q):
        _, vec = eigh_complex(x)
        qc = np.ascontiguousarray(q, dtype=np.complex128)
        out = np.empty((n, n), dtype=np.complex128)
        tmp = np.empty((n, n), dtype=np.complex128)
        qt = np.empty((n, n), dtype=np.complex128)
        _weighted_complex_py(vec, qc, mu, tmp, qt, out)
        return out
    _, vec = eigh_real(x)
    qr = np.ascontiguousarray(q, dtype=np.float64)
    out = np.empty((n, n), dtype=np.float64)
    tmp = np.empty((n, n), dtype=np.float64)
    qt = np.empty((n, n), dtype=np.float64)
    _weighted_real_py(vec, qr, mu, tmp, qt, out)
    return out


cdef _weighted_real_py(double[:, ::1] v, double[:, ::1] q, double[::1] mu,
                       double[:, ::1] tmp, double[:, ::1] qt, double[:, ::1] out):
    with nogil:
        _weighted_real(v, q, mu, tmp, qt, out)


cdef _weighted_complex_py(double complex[:, ::1] v, double complex[:, ::1] q,
                          double[::1] mu, double complex[:, ::1] tmp,
                          double complex[:, ::1] qt, double complex[:, ::1] out):
    with nogil:
        _weighted_complex(v, q, mu, tmp, qt, out)


def snap_spectrum(x, values):
    """Replace the eigenvalues of ``x`` by ``values``, keeping its eigenframe.

    Returns the snapped matrix and the largest absolute eigenvalue drift.
    """
    cdef double[::1] mu = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = mu.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double drift = 0.0
    cdef double racc
    cdef double complex cacc
    cdef double[::1] w
    cdef double[:, ::1] vr
    cdef double[:, ::1] outr
    cdef double complex[:, ::1] vc
    cdef double complex[:, ::1] outc
    if np.iscomplexobj(x):
        wa, va = eigh_complex(x)
        w = wa
        vc = va
        out = np.empty((n, n), dtype=np.complex128)
        outc = out
        with nogil:
            for i in range(n):
                drift = max(drift, fabs(w[i] - mu[i]))
            for i in range(n):
                for j in range(i, n):
                    cacc = 0.0
                    for k in range(n):
                        cacc = cacc + vc[i, k] * mu[k] * conj(vc[j, k])
                    outc[i, j] = cacc
                outc[i, i] = creal(outc[i, i])
                for j in range(i + 1, n):
                    outc[j, i] = conj(outc[i, j])
        return out, drift
    wa, va = eigh_real(x)
    w = wa
    vr = va
    out = np.empty((n, n), dtype=np.float64)
    outr = out
    with nogil:
        for i in range(n):
            drift = max(drift, fabs(w[i] - mu[i]))
        for i in range(n):
            for j in range(i, n):
                racc = 0.0
                for k in range(n):
                    racc = racc + vr[i, k] * mu[k] * vr[j, k]
                outr[i, j] = racc
            for j in range(i + 1, n):
                outr[j, i] = outr[i, j]
    return out, drift
